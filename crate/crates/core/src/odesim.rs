//! Simulation of uncertain linear systems under distributed adaptive diagonal gains.
//!
//! Three closed loops are supported:
//!
//! ```text
//! SystemI     x' = (A - K(t) B) x      k_i' = c_i |x_i|^{p_i}
//! SystemII    x' = (A - B K(t)) x      k_i' = c_i |x_i|^{p_i}
//! ScalarGain  x' = (A - k(t) B) x      k'   = c ||x||_2^p
//! ```
//!
//! The state and gains are integrated together by fixed-step RK4, so `K` is
//! rebuilt from the gain components at every stage. In frozen-gain mode the gain
//! derivatives are zero and the loop is a constant linear system.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matana::{self, inf_norm, Norm};
use crate::matrix::SquareMatrix;
use crate::rk4::Rk4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    SystemI,
    SystemII,
    ScalarGain,
}

/// `|v|^p`, with `0^p = 0`. Exponents are generally non-integer.
#[inline]
pub fn abs_pow(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if a == 0.0 {
        0.0
    } else {
        (p * a.ln()).exp()
    }
}

/// Diagonal adaptive gains and their update parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GainState {
    pub k: Vec<f64>,
    pub c: Vec<f64>,
    pub p: Vec<f64>,
    pub k0: Vec<f64>,
}

impl GainState {
    /// Checks `c_i > 0`, `p_i >= 1`, `k_i(0) > 0`.
    pub fn new(k0: Vec<f64>, c: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let len = k0.len();
        for v in [&c, &p] {
            if v.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    got: v.len(),
                });
            }
        }
        if len == 0 {
            return Err(Error::Validation("gain vector is empty".into()));
        }
        if k0.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::Validation("initial gains must be positive".into()));
        }
        if c.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Validation("update rates c must be positive".into()));
        }
        if p.iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
            return Err(Error::Validation("update exponents p must be >= 1".into()));
        }
        Ok(GainState {
            k: k0.clone(),
            c,
            p,
            k0,
        })
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }
}

/// The plant `(A, B)` together with how the gain enters and whether it adapts.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveSystem {
    pub kind: SystemKind,
    pub a: SquareMatrix,
    pub b: SquareMatrix,
    pub frozen: bool,
}

impl AdaptiveSystem {
    pub fn new(kind: SystemKind, a: SquareMatrix, b: SquareMatrix) -> Result<Self> {
        if a.n() != b.n() {
            return Err(Error::DimensionMismatch {
                expected: a.n(),
                got: b.n(),
            });
        }
        Ok(AdaptiveSystem {
            kind,
            a,
            b,
            frozen: false,
        })
    }

    pub fn with_frozen_gains(mut self, frozen: bool) -> Self {
        self.frozen = frozen;
        self
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn gain_len(&self) -> usize {
        match self.kind {
            SystemKind::ScalarGain => 1,
            _ => self.n(),
        }
    }

    fn check_dims(&self, x: &[f64], g: &GainState) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        if g.len() != self.gain_len() {
            return Err(Error::DimensionMismatch {
                expected: self.gain_len(),
                got: g.len(),
            });
        }
        Ok(())
    }

    /// `A - K B`, `A - B K` or `A - k B` for the given gains.
    pub fn closed_loop_matrix(&self, k: &[f64]) -> SquareMatrix {
        match self.kind {
            SystemKind::SystemI => self.a.sub(&self.b.scale_rows(k)),
            SystemKind::SystemII => self.a.sub(&self.b.scale_cols(k)),
            SystemKind::ScalarGain => self.a.sub(&self.b.scale(k[0])),
        }
    }

    /// Derivative of the stacked vector `[x; k]`. `scratch` holds two n-vectors.
    fn rhs(&self, c: &[f64], p: &[f64], y: &[f64], dy: &mut [f64], scratch: &mut [f64]) {
        let n = self.n();
        let (x, k) = y.split_at(n);
        let (dx, dk) = dy.split_at_mut(n);
        let (ax, tmp) = scratch.split_at_mut(n);
        self.a.mul_vec_into(x, ax);
        match self.kind {
            SystemKind::SystemI => {
                self.b.mul_vec_into(x, tmp);
                for i in 0..n {
                    dx[i] = ax[i] - k[i] * tmp[i];
                }
            }
            SystemKind::SystemII => {
                let kx: Vec<f64> = x.iter().zip(k).map(|(x, k)| x * k).collect();
                self.b.mul_vec_into(&kx, tmp);
                for i in 0..n {
                    dx[i] = ax[i] - tmp[i];
                }
            }
            SystemKind::ScalarGain => {
                self.b.mul_vec_into(x, tmp);
                for i in 0..n {
                    dx[i] = ax[i] - k[0] * tmp[i];
                }
            }
        }
        if self.frozen {
            dk.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        match self.kind {
            SystemKind::ScalarGain => {
                let norm2 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                dk[0] = c[0] * abs_pow(norm2, p[0]);
            }
            _ => {
                for i in 0..n {
                    dk[i] = c[i] * abs_pow(x[i], p[i]);
                }
            }
        }
    }
}

/// Reusable RK4 stepper for one `AdaptiveSystem`.
struct Stepper<'a> {
    sys: &'a AdaptiveSystem,
    c: Vec<f64>,
    p: Vec<f64>,
    rk: Rk4,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(sys: &'a AdaptiveSystem, g: &GainState) -> Self {
        let n = sys.n();
        Stepper {
            sys,
            c: g.c.clone(),
            p: g.p.clone(),
            rk: Rk4::new(n + g.len()),
            scratch: vec![0.0; 2 * n],
        }
    }

    fn step(&mut self, y: &mut [f64], t: f64, dt: f64) {
        let Stepper {
            sys,
            c,
            p,
            rk,
            scratch,
        } = self;
        rk.step(|_, y, dy| sys.rhs(c, p, y, dy, scratch), t, y, dt);
    }
}

/// One RK4 step of the coupled state/gain equations.
pub fn step_system(
    sys: &AdaptiveSystem,
    x: &[f64],
    g: &GainState,
    dt: f64,
) -> Result<(Vec<f64>, GainState)> {
    sys.check_dims(x, g)?;
    if !(dt > 0.0) {
        return Err(Error::Validation("step size must be positive".into()));
    }
    let n = sys.n();
    let mut y: Vec<f64> = x.iter().chain(&g.k).copied().collect();
    Stepper::new(sys, g).step(&mut y, 0.0, dt);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: dt });
    }
    let mut next = g.clone();
    next.k.copy_from_slice(&y[n..]);
    y.truncate(n);
    Ok((y, next))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub horizon: f64,
    pub output_stride: usize,
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation("integrator.dt must be positive".into()));
        }
        if !(self.horizon > self.dt && self.horizon.is_finite()) {
            return Err(Error::Validation(
                "integrator.horizon must exceed integrator.dt".into(),
            ));
        }
        if self.output_stride == 0 {
            return Err(Error::Validation(
                "integrator.output_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil() as usize
    }
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            dt: 1e-3,
            horizon: 30.0,
            output_stride: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopSettings {
    /// Threshold on `||x||_inf` (systems) or the sync error (networks).
    pub eps: f64,
    pub hold_time: f64,
    pub divergence_cap: f64,
}

impl StopSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !(self.hold_time >= 0.0) || !(self.divergence_cap > 0.0) {
            return Err(Error::Validation(
                "stop thresholds must be positive and hold_time non-negative".into(),
            ));
        }
        Ok(())
    }
}

impl Default for StopSettings {
    fn default() -> Self {
        StopSettings {
            eps: 1e-8,
            hold_time: 1.0,
            divergence_cap: 1e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceCause {
    NonFinite,
    NormCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    /// Ran to the horizon.
    Horizon,
    /// The hold condition was met and the run stopped early.
    Converged,
    Diverged { t: f64, cause: DivergenceCause },
}

/// Tracks "below `eps` for `hold_time`" over a run.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HoldTracker {
    eps: f64,
    hold: f64,
    below_since: Option<f64>,
}

impl HoldTracker {
    pub(crate) fn new(eps: f64, hold: f64) -> Self {
        HoldTracker {
            eps,
            hold,
            below_since: None,
        }
    }

    /// Feeds one sample; returns true once the condition has been sustained.
    pub(crate) fn update(&mut self, t: f64, value: f64) -> bool {
        if value < self.eps {
            let since = *self.below_since.get_or_insert(t);
            t - since >= self.hold - 1e-9
        } else {
            self.below_since = None;
            false
        }
    }

    pub(crate) fn since(&self) -> Option<f64> {
        self.below_since
    }
}

/// Recorded samples of one run. Samples are every `output_stride` steps, plus
/// the final step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub gains: Vec<Vec<f64>>,
    pub dt: f64,
    pub output_stride: usize,
    pub termination: Termination,
    /// Start of the sustained sub-threshold interval that ended the run.
    pub settle_time: Option<f64>,
    /// Largest `||x||_inf` over every integration step, not only recorded ones.
    pub max_state_norm: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn diverged(&self) -> bool {
        matches!(self.termination, Termination::Diverged { .. })
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_gains(&self) -> &[f64] {
        self.gains.last().expect("trajectory is never empty")
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Index of the last sample with time `<= t` (clamped to the first sample).
    pub fn sample_index(&self, t: f64) -> usize {
        self.times
            .partition_point(|&s| s <= t + 1e-12)
            .saturating_sub(1)
    }

    /// Same trajectory with every state mapped through `f` (e.g. a change of
    /// coordinates).
    pub fn map_states(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Trajectory {
        Trajectory {
            states: self.states.iter().map(|x| f(x)).collect(),
            ..self.clone()
        }
    }

    /// Total gain increase (summed over components) over the last `fraction`
    /// of the recorded time span.
    pub fn tail_gain_growth(&self, fraction: f64) -> f64 {
        let t0 = self.times[0];
        let t_end = self.end_time();
        let start = self.sample_index(t_end - fraction * (t_end - t0));
        self.final_gains()
            .iter()
            .zip(&self.gains[start])
            .map(|(a, b)| a - b)
            .sum()
    }

    /// First recorded time at which every gain is at least `threshold`.
    pub fn threshold_crossing_time(&self, threshold: &[f64]) -> Option<f64> {
        self.gains
            .iter()
            .position(|k| k.iter().zip(threshold).all(|(k, th)| k >= th))
            .map(|i| self.times[i])
    }

    /// Writes `t,x1..xn,k1..km` rows at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let m = self.gains.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=m).map(|i| format!("k{i}")));
        writeln!(w, "{}", header.join(","))?;
        for ((t, x), k) in self.times.iter().zip(&self.states).zip(&self.gains) {
            write!(w, "{t:.16e}")?;
            for v in x.iter().chain(k) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Everything needed for one System I / II / scalar-gain run.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemScenario {
    pub system: AdaptiveSystem,
    pub x0: Vec<f64>,
    pub gains: GainState,
    pub integrator: IntegratorSettings,
    pub stop: StopSettings,
}

/// Fixed-step RK4 run from `t = 0` to the horizon. Stops early when
/// `||x||_inf < eps` has held for `hold_time`, or on divergence (non-finite
/// values or `||x||_inf > divergence_cap`); the cause is recorded in
/// `termination`.
pub fn simulate(sc: &SystemScenario) -> Result<Trajectory> {
    let sys = &sc.system;
    sys.check_dims(&sc.x0, &sc.gains)?;
    sc.integrator.validate()?;
    sc.stop.validate()?;
    let n = sys.n();
    let IntegratorSettings {
        dt,
        output_stride,
        ..
    } = sc.integrator;
    let n_steps = sc.integrator.n_steps();

    let mut y: Vec<f64> = sc.x0.iter().chain(&sc.gains.k).copied().collect();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![sc.x0.clone()],
        gains: vec![sc.gains.k.clone()],
        dt,
        output_stride,
        termination: Termination::Horizon,
        settle_time: None,
        max_state_norm: inf_norm(&sc.x0),
    };
    let mut hold = HoldTracker::new(sc.stop.eps, sc.stop.hold_time);
    hold.update(0.0, traj.max_state_norm);

    let mut stepper = Stepper::new(sys, &sc.gains);
    let mut last_good = y.clone();
    let mut recorded_step = 0usize;
    for step in 1..=n_steps {
        stepper.step(&mut y, (step - 1) as f64 * dt, dt);
        let t = step as f64 * dt;
        if y.iter().any(|v| !v.is_finite()) {
            traj.termination = Termination::Diverged {
                t,
                cause: DivergenceCause::NonFinite,
            };
            y = last_good;
            let t_last = (step - 1) as f64 * dt;
            if recorded_step != step - 1 {
                traj.times.push(t_last);
                traj.states.push(y[..n].to_vec());
                traj.gains.push(y[n..].to_vec());
            }
            return Ok(traj);
        }
        let norm = inf_norm(&y[..n]);
        traj.max_state_norm = traj.max_state_norm.max(norm);
        let diverged = norm > sc.stop.divergence_cap;
        let converged = !diverged && hold.update(t, norm);
        if diverged {
            traj.termination = Termination::Diverged {
                t,
                cause: DivergenceCause::NormCap,
            };
        } else if converged {
            traj.termination = Termination::Converged;
            traj.settle_time = hold.since();
        }
        let last = diverged || converged || step == n_steps;
        if step % output_stride == 0 || last {
            traj.times.push(t);
            traj.states.push(y[..n].to_vec());
            traj.gains.push(y[n..].to_vec());
            recorded_step = step;
        }
        if last {
            break;
        }
        last_good.copy_from_slice(&y);
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub settle_time: Option<f64>,
    pub final_gains: Vec<f64>,
    pub max_state_norm: f64,
    /// Total gain increase over the last 10% of the run.
    pub gain_deltas_tail: f64,
}

impl ConvergenceReport {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let converged = traj.termination == Termination::Converged;
        ConvergenceReport {
            converged,
            settle_time: if converged { traj.settle_time } else { None },
            final_gains: traj.final_gains().to_vec(),
            max_state_norm: traj.max_state_norm,
            gain_deltas_tail: traj.tail_gain_growth(0.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingSide {
    Row,
    Column,
}

impl ScalingSide {
    /// The side matching a closed loop: System I uses row dominance, System II
    /// column dominance.
    pub fn for_kind(kind: SystemKind) -> Option<Self> {
        match kind {
            SystemKind::SystemI => Some(ScalingSide::Row),
            SystemKind::SystemII => Some(ScalingSide::Column),
            SystemKind::ScalarGain => None,
        }
    }
}

/// Per-channel gain thresholds above which the frozen closed loop is
/// exponentially stable with rate at least `delta`.
///
/// Row case (System I): with `d = find_row_scaling(B)`, `Ā = D⁻¹AD`, `B̄ = D⁻¹BD`,
///
/// ```text
/// k̄_i = (ā_ii + Σ_{j≠i} |ā_ij| + δ) / (b̄_ii − Σ_{j≠i} |b̄_ij|)
/// ```
///
/// Column case (System II): with `d = find_column_scaling(B)`, `Ã = DAD⁻¹`,
/// `B̃ = DBD⁻¹` and the same formula over columns. Results are clamped at 0.
/// Returns `None` unless `B` is an H-matrix with positive diagonal.
pub fn estimate_threshold_gains(
    a: &SquareMatrix,
    b: &SquareMatrix,
    delta: f64,
    side: ScalingSide,
) -> Option<Vec<f64>> {
    assert!(delta > 0.0, "delta must be positive");
    assert_eq!(a.n(), b.n(), "A and B must have equal dimensions");
    if b.diagonal().iter().any(|d| *d <= 0.0) {
        return None;
    }
    let tol = matana::DEFAULT_TOL;
    let (a_s, b_s) = match side {
        ScalingSide::Row => {
            let d = matana::find_row_scaling(b, tol)?;
            let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
            // Work on transposes so both cases reduce to row sums below.
            (
                a.diag_similarity(&inv, &d),
                b.diag_similarity(&inv, &d),
            )
        }
        ScalingSide::Column => {
            let d = matana::find_column_scaling(b, tol)?;
            let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
            (
                a.diag_similarity(&d, &inv).transpose(),
                b.diag_similarity(&d, &inv).transpose(),
            )
        }
    };
    let n = a.n();
    let off_sum = |m: &SquareMatrix, i: usize| -> f64 {
        (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum()
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let denom = b_s[(i, i)] - off_sum(&b_s, i);
        if !(denom > 0.0) {
            return None;
        }
        let num = a_s[(i, i)] + off_sum(&a_s, i) + delta;
        out.push((num / denom).max(0.0));
    }
    Some(out)
}

/// Worst-case slack of the two Coppel bounds along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoppelCheck {
    pub holds: bool,
    /// `min_t (upper(t) - ||x(t)||) / upper(t)`; negative means a violation.
    pub upper_margin: f64,
    /// `min_t (||x(t)|| - lower(t)) / lower(t)`.
    pub lower_margin: f64,
}

/// Checks `||x0|| exp(-∫μ(-M)) <= ||x(t)|| <= ||x0|| exp(∫μ(M))` at every
/// recorded sample, with the integrals accumulated by the trapezoid rule on the
/// recorded grid. `matrix_of_t` gives the system matrix `M(t)` of `x' = M(t) x`.
pub fn coppel_check<F>(traj: &Trajectory, mut matrix_of_t: F, norm: Norm, tol: f64) -> Result<CoppelCheck>
where
    F: FnMut(f64) -> SquareMatrix,
{
    if traj.is_empty() {
        return Err(Error::Validation("empty trajectory".into()));
    }
    let dim = traj.states[0].len();
    let mut measures = |t: f64| -> Result<(f64, f64)> {
        let m = matrix_of_t(t);
        if m.n() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.n(),
            });
        }
        Ok((norm.measure(&m), norm.measure(&m.scale(-1.0))))
    };
    let x0 = norm.vector_norm(&traj.states[0]);
    let (mut mu_prev, mut mu_neg_prev) = measures(traj.times[0])?;
    let (mut int_mu, mut int_mu_neg) = (0.0, 0.0);
    let mut upper_margin = f64::INFINITY;
    let mut lower_margin = f64::INFINITY;
    for i in 1..traj.len() {
        let h = traj.times[i] - traj.times[i - 1];
        let (mu, mu_neg) = measures(traj.times[i])?;
        int_mu += 0.5 * h * (mu + mu_prev);
        int_mu_neg += 0.5 * h * (mu_neg + mu_neg_prev);
        mu_prev = mu;
        mu_neg_prev = mu_neg;
        let xn = norm.vector_norm(&traj.states[i]);
        let upper = x0 * int_mu.exp();
        let lower = x0 * (-int_mu_neg).exp();
        if upper > 0.0 {
            upper_margin = upper_margin.min((upper - xn) / upper);
        }
        if lower > 0.0 {
            lower_margin = lower_margin.min((xn - lower) / lower);
        }
    }
    Ok(CoppelCheck {
        holds: upper_margin >= -tol && lower_margin >= -tol,
        upper_margin,
        lower_margin,
    })
}

/// True iff both Coppel bounds hold at every sample within relative slack `tol`.
pub fn verify_coppel<F>(traj: &Trajectory, matrix_of_t: F, norm: Norm, tol: f64) -> Result<bool>
where
    F: FnMut(f64) -> SquareMatrix,
{
    Ok(coppel_check(traj, matrix_of_t, norm, tol)?.holds)
}

/// Least-squares slope of `ln ||x(t)||_inf` against `t` over samples with
/// `t >= t_start` and nonzero state.
pub fn exponential_rate_fit(traj: &Trajectory, t_start: f64) -> Result<f64> {
    const MIN_SAMPLES: usize = 10;
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= t_start)
        .map(|(t, x)| (*t, inf_norm(x)))
        .filter(|(_, v)| *v > 0.0 && v.is_finite())
        .map(|(t, v)| (t, v.ln()))
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            found: pts.len(),
            t_start,
        });
    }
    let len = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in &pts {
        sxy += (t - t_mean) * (y - y_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar(v: f64) -> SquareMatrix {
        SquareMatrix::from_rows(&[[v]]).unwrap()
    }

    #[test]
    fn zero_state_is_frozen() {
        let sys = AdaptiveSystem::new(SystemKind::SystemI, scalar(0.0), scalar(1.0)).unwrap();
        let g = GainState::new(vec![2.0], vec![1.0], vec![1.5]).unwrap();
        let (x, g2) = step_system(&sys, &[0.0], &g, 1e-3).unwrap();
        assert_eq!(x, vec![0.0]);
        assert_eq!(g2.k, g.k);
    }

    #[test]
    fn gain_parameter_validation() {
        assert!(GainState::new(vec![1.0], vec![0.0], vec![1.0]).is_err());
        assert!(GainState::new(vec![1.0], vec![1.0], vec![0.5]).is_err());
        assert!(GainState::new(vec![0.0], vec![1.0], vec![1.0]).is_err());
        assert!(GainState::new(vec![1.0, 1.0], vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn abs_pow_branches() {
        assert_eq!(abs_pow(0.0, 1.5), 0.0);
        assert_abs_diff_eq!(abs_pow(-4.0, 1.5), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(abs_pow(3.0, 2.0), 9.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_loop_matrices() {
        let a = SquareMatrix::zeros(2);
        let b = SquareMatrix::from_rows(&[[2.0, 3.0], [-1.0, -1.0]]).unwrap();
        let k = [1.0, 4.0];
        let one = AdaptiveSystem::new(SystemKind::SystemI, a.clone(), b.clone()).unwrap();
        assert_eq!(one.closed_loop_matrix(&k).as_slice(), &[-2.0, -3.0, 4.0, 4.0]);
        let two = AdaptiveSystem::new(SystemKind::SystemII, a.clone(), b.clone()).unwrap();
        assert_eq!(two.closed_loop_matrix(&k).as_slice(), &[-2.0, -12.0, 1.0, 4.0]);
        let s = AdaptiveSystem::new(SystemKind::ScalarGain, a, b).unwrap();
        assert_eq!(s.closed_loop_matrix(&[2.0]).as_slice(), &[-4.0, -6.0, 2.0, 2.0]);
    }

    #[test]
    fn hold_tracker_requires_sustained_interval() {
        let mut h = HoldTracker::new(1.0, 0.5);
        assert!(!h.update(0.0, 0.5));
        assert!(!h.update(0.3, 2.0));
        assert!(!h.update(0.4, 0.1));
        assert!(!h.update(0.8, 0.1));
        assert!(h.update(0.9, 0.1));
        assert_eq!(h.since(), Some(0.4));
    }

    #[test]
    fn threshold_gains_trivial_case() {
        let k = estimate_threshold_gains(
            &SquareMatrix::zeros(3),
            &SquareMatrix::identity(3),
            1.0,
            ScalingSide::Row,
        )
        .unwrap();
        assert_eq!(k, vec![1.0; 3]);
        let nonh2 = SquareMatrix::from_rows(&[[2.0, 3.0], [-1.0, -1.0]]).unwrap();
        assert!(
            estimate_threshold_gains(&SquareMatrix::identity(2), &nonh2, 1.0, ScalingSide::Row)
                .is_none()
        );
        // H-matrix with a negative diagonal entry fails the hypothesis too.
        let neg = SquareMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(estimate_threshold_gains(&SquareMatrix::zeros(2), &neg, 1.0, ScalingSide::Column)
            .is_none());
    }

    #[test]
    fn rate_fit_needs_samples() {
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![vec![1.0], vec![0.5]],
            gains: vec![vec![1.0], vec![1.0]],
            dt: 1.0,
            output_stride: 1,
            termination: Termination::Horizon,
            settle_time: None,
            max_state_norm: 1.0,
        };
        assert!(matches!(
            exponential_rate_fit(&traj, 0.0),
            Err(Error::InsufficientData { found: 2, .. })
        ));
    }

    #[test]
    fn csv_header_and_precision() {
        let traj = Trajectory {
            times: vec![0.0],
            states: vec![vec![0.1, -2.0]],
            gains: vec![vec![1.0 / 3.0, 2.0]],
            dt: 1e-3,
            output_stride: 1,
            termination: Termination::Horizon,
            settle_time: None,
            max_state_norm: 2.0,
        };
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x1,x2,k1,k2");
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(row[3], 1.0 / 3.0);
        assert_eq!(row[1], 0.1);
    }
}
