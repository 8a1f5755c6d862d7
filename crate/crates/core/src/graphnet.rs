//! Undirected graphs, their incidence and Laplacian matrices, and networks of
//! forced Van der Pol oscillators with adaptive coupling weights.
//!
//! Node-based coupling gives each node a weight `k_i` on its whole diffusive sum;
//! edge-based coupling gives each edge its own weight `k_ij`:
//!
//! ```text
//! node:  z_i' = f(z_i, t) + k_i Σ_{j∈N_i} (z_j − z_i)    k_i'  = c_i ||Σ_{j∈N_i} (z_j − z_i)||^{p_i}
//! edge:  z_i' = f(z_i, t) + Σ_{j∈N_i} k_ij (z_j − z_i)   k_ij' = c_ij ||z_j − z_i||^{p_ij}
//! ```
//!
//! where `z_i = (x_i, y_i)` and `f` is the Van der Pol drift.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::odesim::{
    abs_pow, DivergenceCause, HoldTracker, IntegratorSettings, StopSettings, Termination,
    Trajectory,
};
use crate::rk4::Rk4;
use crate::sampling;

pub const ER_MAX_ATTEMPTS: usize = 1000;

/// Simple undirected graph. Edges are stored as `(i, j)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if a >= n_nodes || b >= n_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {n_nodes} nodes"
                )));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        if let Some(w) = out.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Graph {
            n_nodes,
            edges: out,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn m_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_nodes];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn component_count(&self) -> usize {
        let mut dsu = DisjointSet::new(self.n_nodes);
        for &(i, j) in &self.edges {
            dsu.union(i, j);
        }
        dsu.set_count()
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Relabels node `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n_nodes {
            return Err(Error::DimensionMismatch {
                expected: self.n_nodes,
                got: perm.len(),
            });
        }
        Graph::new(
            self.n_nodes,
            self.edges.iter().map(|&(i, j)| (perm[i], perm[j])),
        )
    }

    /// Graph file format: first line `n m`, then `m` lines `i j`.
    pub fn parse_text(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: source.to_string(),
            line,
            msg,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_pair = |line: usize, l: &str| -> Result<(usize, usize)> {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(err(line, format!("expected two integers, found `{l}`")));
            }
            let a = toks[0]
                .parse()
                .map_err(|_| err(line, format!("bad integer `{}`", toks[0])))?;
            let b = toks[1]
                .parse()
                .map_err(|_| err(line, format!("bad integer `{}`", toks[1])))?;
            Ok((a, b))
        };
        let (line, header) = lines.next().ok_or_else(|| err(1, "empty graph file".into()))?;
        let (n, m) = parse_pair(line, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            edges.push(parse_pair(line, l)?);
        }
        if edges.len() != m {
            return Err(err(
                line,
                format!("header announces {m} edges, found {}", edges.len()),
            ));
        }
        Graph::new(n, edges).map_err(|e| err(line, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Graph::parse_text(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n_nodes, self.edges.len());
        for (i, j) in &self.edges {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
            sets: n,
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.sets -= 1;
        true
    }

    pub fn set_count(&self) -> usize {
        self.sets
    }
}

/// `m x n` incidence matrix: row `e = (i, j)` has `-1` at column `i` and `+1`
/// at column `j` (`i < j`).
pub fn incidence_matrix(g: &Graph) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(g.m_edges(), g.n_nodes());
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        h[(e, i)] = -1.0;
        h[(e, j)] = 1.0;
    }
    h
}

/// Degree matrix minus adjacency (equal to `HᵀH`).
pub fn laplacian(g: &Graph) -> SquareMatrix {
    let mut l = SquareMatrix::zeros(g.n_nodes());
    for &(i, j) in g.edges() {
        l[(i, j)] -= 1.0;
        l[(j, i)] -= 1.0;
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
    }
    l
}

/// Node-weighted edge Laplacian `H diag(w) Hᵀ` (`m x m`).
pub fn edge_laplacian(g: &Graph, node_weights: &[f64]) -> Result<DMatrix<f64>> {
    if node_weights.len() != g.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: g.n_nodes(),
            got: node_weights.len(),
        });
    }
    if node_weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Validation("node weights must be positive".into()));
    }
    let h = incidence_matrix(g);
    let mut hk = h.clone();
    for (j, w) in node_weights.iter().enumerate() {
        hk.column_mut(j).scale_mut(*w);
    }
    Ok(&hk * h.transpose())
}

/// `G(n, rho)` with every pair drawn independently from a ChaCha8 stream seeded
/// with `seed`. Disconnected draws are retried with `seed + 1`, `seed + 2`, ...;
/// returns the first connected graph and the seed that produced it.
pub fn erdos_renyi(n: usize, rho: f64, seed: u64) -> Result<(Graph, u64)> {
    if n < 2 {
        return Err(Error::Validation("Erdos-Renyi graphs need n >= 2".into()));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Validation("rho must lie in (0, 1]".into()));
    }
    for attempt in 0..ER_MAX_ATTEMPTS as u64 {
        let s = seed.wrapping_add(attempt);
        let mut rng = sampling::rng(s);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < rho {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::new(n, edges)?;
        if g.is_connected() {
            return Ok((g, s));
        }
    }
    Err(Error::GenerationExhausted {
        attempts: ER_MAX_ATTEMPTS,
        n,
        rho,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drive {
    /// `amplitude * sin(frequency * t)`
    Sine { amplitude: f64, frequency: f64 },
    None,
}

impl Drive {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Drive::Sine {
                amplitude,
                frequency,
            } => amplitude * (frequency * t).sin(),
            Drive::None => 0.0,
        }
    }
}

impl Default for Drive {
    fn default() -> Self {
        Drive::Sine {
            amplitude: 1.0,
            frequency: 1.0,
        }
    }
}

/// Forced Van der Pol node: `x' = w y − (a/3) x³ − b x`, `y' = −w x + μ(t)/w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub w: f64,
    pub a: f64,
    pub b: f64,
    pub drive: Drive,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        OscillatorParams {
            w: 1.0,
            a: 1.0,
            b: 1.0,
            drive: Drive::default(),
        }
    }
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.w, self.a, self.b].iter().all(|v| v.is_finite());
        let drive_ok = match self.drive {
            Drive::Sine {
                amplitude,
                frequency,
            } => amplitude.is_finite() && frequency.is_finite(),
            Drive::None => true,
        };
        if !finite || !drive_ok {
            return Err(Error::Validation("oscillator parameters must be finite".into()));
        }
        if self.w == 0.0 {
            return Err(Error::Validation("oscillator.w must be nonzero".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn drift(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        (
            self.w * y - self.a / 3.0 * x * x * x - self.b * x,
            -self.w * x + self.drive.eval(t) / self.w,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingMode {
    Node,
    Edge,
}

/// Adaptive coupling weights: one per node or one per edge (sorted edge order).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingState {
    pub mode: CouplingMode,
    pub weights: Vec<f64>,
    pub c: Vec<f64>,
    pub p: Vec<f64>,
}

impl CouplingState {
    pub fn new(mode: CouplingMode, weights: Vec<f64>, c: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        for v in [&c, &p] {
            if v.len() != weights.len() {
                return Err(Error::DimensionMismatch {
                    expected: weights.len(),
                    got: v.len(),
                });
            }
        }
        if weights.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::Validation("coupling weights must be positive".into()));
        }
        if c.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Validation("update rates c must be positive".into()));
        }
        if p.iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
            return Err(Error::Validation("update exponents p must be >= 1".into()));
        }
        Ok(CouplingState {
            mode,
            weights,
            c,
            p,
        })
    }
}

/// A graph of oscillators with a coupling mode. Adjacency is precomputed.
#[derive(Debug, Clone)]
pub struct Network {
    graph: Graph,
    neighbors: Vec<Vec<usize>>,
    pub params: OscillatorParams,
    pub mode: CouplingMode,
    pub frozen: bool,
}

impl Network {
    pub fn new(graph: Graph, params: OscillatorParams, mode: CouplingMode) -> Self {
        let neighbors = graph.neighbors();
        Network {
            graph,
            neighbors,
            params,
            mode,
            frozen: false,
        }
    }

    pub fn with_frozen_weights(mut self, frozen: bool) -> Self {
        self.frozen = frozen;
        self
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn weight_len(&self) -> usize {
        match self.mode {
            CouplingMode::Node => self.graph.n_nodes(),
            CouplingMode::Edge => self.graph.m_edges(),
        }
    }

    fn check_dims(&self, states: &[f64], coupling: &CouplingState) -> Result<()> {
        if states.len() != 2 * self.graph.n_nodes() {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.graph.n_nodes(),
                got: states.len(),
            });
        }
        if coupling.mode != self.mode {
            return Err(Error::Validation("coupling mode does not match network".into()));
        }
        if coupling.weights.len() != self.weight_len() {
            return Err(Error::DimensionMismatch {
                expected: self.weight_len(),
                got: coupling.weights.len(),
            });
        }
        Ok(())
    }

    /// Derivative of `[x_1, y_1, ..., x_n, y_n, k...]`. Every node reads the same
    /// snapshot `y`.
    fn rhs(&self, c: &[f64], p: &[f64], t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.graph.n_nodes();
        let (z, k) = y.split_at(2 * n);
        let (dz, dk) = dy.split_at_mut(2 * n);
        for i in 0..n {
            let (fx, fy) = self.params.drift(z[2 * i], z[2 * i + 1], t);
            dz[2 * i] = fx;
            dz[2 * i + 1] = fy;
        }
        match self.mode {
            CouplingMode::Node => {
                for i in 0..n {
                    let (xi, yi) = (z[2 * i], z[2 * i + 1]);
                    let (mut sx, mut sy) = (0.0, 0.0);
                    for &j in &self.neighbors[i] {
                        sx += z[2 * j] - xi;
                        sy += z[2 * j + 1] - yi;
                    }
                    dz[2 * i] += k[i] * sx;
                    dz[2 * i + 1] += k[i] * sy;
                    dk[i] = if self.frozen {
                        0.0
                    } else {
                        c[i] * abs_pow((sx * sx + sy * sy).sqrt(), p[i])
                    };
                }
            }
            CouplingMode::Edge => {
                for (e, &(i, j)) in self.graph.edges().iter().enumerate() {
                    let dx = z[2 * j] - z[2 * i];
                    let dyv = z[2 * j + 1] - z[2 * i + 1];
                    dz[2 * i] += k[e] * dx;
                    dz[2 * i + 1] += k[e] * dyv;
                    dz[2 * j] -= k[e] * dx;
                    dz[2 * j + 1] -= k[e] * dyv;
                    dk[e] = if self.frozen {
                        0.0
                    } else {
                        c[e] * abs_pow((dx * dx + dyv * dyv).sqrt(), p[e])
                    };
                }
            }
        }
    }
}

/// One RK4 step from time `t`.
pub fn step_network(
    net: &Network,
    states: &[f64],
    coupling: &CouplingState,
    t: f64,
    dt: f64,
) -> Result<(Vec<f64>, CouplingState)> {
    net.check_dims(states, coupling)?;
    if !(dt > 0.0) {
        return Err(Error::Validation("step size must be positive".into()));
    }
    let mut y: Vec<f64> = states.iter().chain(&coupling.weights).copied().collect();
    let mut rk = Rk4::new(y.len());
    rk.step(
        |t, y, dy| net.rhs(&coupling.c, &coupling.p, t, y, dy),
        t,
        &mut y,
        dt,
    );
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: t + dt });
    }
    let mut next = coupling.clone();
    next.weights.copy_from_slice(&y[states.len()..]);
    y.truncate(states.len());
    Ok((y, next))
}

/// `max_i ||z_i − z̄||_2` over nodes, `z̄` the node average.
pub fn sync_error(states: &[f64]) -> f64 {
    let n = states.len() / 2;
    if n == 0 {
        return 0.0;
    }
    let (mut mx, mut my) = (0.0, 0.0);
    for z in states.chunks_exact(2) {
        mx += z[0];
        my += z[1];
    }
    mx /= n as f64;
    my /= n as f64;
    states
        .chunks_exact(2)
        .map(|z| ((z[0] - mx).powi(2) + (z[1] - my).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct NetworkScenario {
    pub network: Network,
    /// Interleaved node states `x_1, y_1, ..., x_n, y_n`.
    pub initial_states: Vec<f64>,
    pub coupling: CouplingState,
    pub integrator: IntegratorSettings,
    /// `eps` is the sync-error threshold.
    pub stop: StopSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    /// Sync error at each recorded time of the trajectory.
    pub sync_error_history: Vec<f64>,
    pub final_weights: Vec<f64>,
    pub synchronized: bool,
    pub settle_time: Option<f64>,
    pub final_sync_error: f64,
    pub max_weight: f64,
    /// Total weight increase over the last 10% of the run.
    pub weight_growth_tail: f64,
}

/// Runs the network to the horizon (or divergence). `synchronized` means the
/// sync error entered `[0, eps)` at `settle_time`, never left it again, and the
/// interval lasted at least `hold_time`.
pub fn simulate_network(sc: &NetworkScenario) -> Result<(Trajectory, SyncReport)> {
    let net = &sc.network;
    net.check_dims(&sc.initial_states, &sc.coupling)?;
    sc.integrator.validate()?;
    sc.stop.validate()?;
    net.params.validate()?;
    let n2 = sc.initial_states.len();
    let IntegratorSettings {
        dt,
        output_stride,
        ..
    } = sc.integrator;
    let n_steps = sc.integrator.n_steps();

    let mut y: Vec<f64> = sc
        .initial_states
        .iter()
        .chain(&sc.coupling.weights)
        .copied()
        .collect();
    let e0 = sync_error(&sc.initial_states);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![sc.initial_states.clone()],
        gains: vec![sc.coupling.weights.clone()],
        dt,
        output_stride,
        termination: Termination::Horizon,
        settle_time: None,
        max_state_norm: crate::matana::inf_norm(&sc.initial_states),
    };
    let mut history = vec![e0];
    let mut hold = HoldTracker::new(sc.stop.eps, sc.stop.hold_time);
    hold.update(0.0, e0);
    let mut last_e = e0;

    let mut rk = Rk4::new(y.len());
    let (c, p) = (&sc.coupling.c, &sc.coupling.p);
    let mut last_good = y.clone();
    let mut recorded_step = 0usize;
    for step in 1..=n_steps {
        rk.step(|t, y, dy| net.rhs(c, p, t, y, dy), (step - 1) as f64 * dt, &mut y, dt);
        let t = step as f64 * dt;
        if y.iter().any(|v| !v.is_finite()) {
            traj.termination = Termination::Diverged {
                t,
                cause: DivergenceCause::NonFinite,
            };
            if recorded_step != step - 1 {
                traj.times.push((step - 1) as f64 * dt);
                traj.states.push(last_good[..n2].to_vec());
                traj.gains.push(last_good[n2..].to_vec());
                history.push(last_e);
            }
            break;
        }
        let norm = crate::matana::inf_norm(&y[..n2]);
        traj.max_state_norm = traj.max_state_norm.max(norm);
        last_e = sync_error(&y[..n2]);
        hold.update(t, last_e);
        let diverged = norm > sc.stop.divergence_cap;
        if diverged {
            traj.termination = Termination::Diverged {
                t,
                cause: DivergenceCause::NormCap,
            };
        }
        let last = diverged || step == n_steps;
        if step % output_stride == 0 || last {
            traj.times.push(t);
            traj.states.push(y[..n2].to_vec());
            traj.gains.push(y[n2..].to_vec());
            history.push(last_e);
            recorded_step = step;
        }
        if last {
            break;
        }
        last_good.copy_from_slice(&y);
    }

    let t_end = traj.end_time();
    let synchronized = !traj.diverged()
        && hold
            .since()
            .is_some_and(|s| t_end - s >= sc.stop.hold_time - 1e-9);
    let settle_time = if synchronized { hold.since() } else { None };
    traj.settle_time = settle_time;
    let final_weights = traj.final_gains().to_vec();
    let report = SyncReport {
        sync_error_history: history,
        max_weight: final_weights.iter().copied().fold(0.0, f64::max),
        final_weights,
        synchronized,
        settle_time,
        final_sync_error: last_e,
        weight_growth_tail: traj.tail_gain_growth(0.1),
    };
    Ok((traj, report))
}

/// Writes `t,e_sync,x_1,y_1,...,x_n,y_n,k_1,...` rows at 17 significant digits.
pub fn write_network_csv<W: Write>(
    traj: &Trajectory,
    report: &SyncReport,
    mut w: W,
) -> std::io::Result<()> {
    let n = traj.states.first().map_or(0, |s| s.len() / 2);
    let m = traj.gains.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string(), "e_sync".to_string()];
    for i in 1..=n {
        header.push(format!("x_{i}"));
        header.push(format!("y_{i}"));
    }
    header.extend((1..=m).map(|i| format!("k_{i}")));
    writeln!(w, "{}", header.join(","))?;
    for (idx, t) in traj.times.iter().enumerate() {
        write!(w, "{t:.16e},{:.16e}", report.sync_error_history[idx])?;
        for v in traj.states[idx].iter().chain(&traj.gains[idx]) {
            write!(w, ",{v:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadCheck {
    pub holds: bool,
    /// Smallest `slack / ||x − y||²` over the samples.
    pub worst_margin: f64,
}

/// Rounding allowance on the normalized slack.
const QUAD_SLACK_TOL: f64 = 1e-12;

/// Samples pairs `(x, y)` uniformly in `[−box, box]²` and evaluates
///
/// ```text
/// slack = −ε ||d||² − dᵀ(f(x) − f(y)) + dᵀ Δ d,   d = x − y
/// ```
///
/// The QUAD inequality holds at a pair iff `slack >= 0`. Evidence, not proof.
pub fn quad_check_sampled_fn<F>(
    f: F,
    delta: [f64; 2],
    epsilon: f64,
    n_samples: usize,
    half_width: f64,
    seed: u64,
) -> QuadCheck
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    assert!(n_samples >= 1 && half_width > 0.0);
    let mut rng = sampling::rng(seed);
    let mut draw = || half_width * (2.0 * rng.random::<f64>() - 1.0);
    let mut worst = f64::INFINITY;
    for _ in 0..n_samples {
        let x = [draw(), draw()];
        let y = [draw(), draw()];
        let d = [x[0] - y[0], x[1] - y[1]];
        let dd = d[0] * d[0] + d[1] * d[1];
        if dd == 0.0 {
            continue;
        }
        let (fx, fy) = (f(x), f(y));
        let inc = d[0] * (fx[0] - fy[0]) + d[1] * (fx[1] - fy[1]);
        let quad = delta[0] * d[0] * d[0] + delta[1] * d[1] * d[1];
        let slack = -epsilon * dd - inc + quad;
        worst = worst.min(slack / dd);
    }
    QuadCheck {
        holds: worst >= -QUAD_SLACK_TOL,
        worst_margin: worst,
    }
}

/// QUAD(Δ, ε) check of the Van der Pol drift at `t = 0`.
pub fn quad_check_sampled(
    params: &OscillatorParams,
    delta: [f64; 2],
    epsilon: f64,
    n_samples: usize,
    half_width: f64,
    seed: u64,
) -> QuadCheck {
    quad_check_sampled_fn(
        |z| {
            let (a, b) = params.drift(z[0], z[1], 0.0);
            [a, b]
        },
        delta,
        epsilon,
        n_samples,
        half_width,
        seed,
    )
}
