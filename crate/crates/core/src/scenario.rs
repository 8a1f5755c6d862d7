//! Scenario files: a flat `dotted.key = value` format, one assignment per line,
//! `#` starts a comment.
//!
//! ```text
//! kind = system1
//! matrices.A = matrices/plant3_A.mat        # path, relative to this file
//! matrices.B = [7 4 -2; -4 6 3; 2 -2 5]   # or an inline matrix
//! initial_state = 5, -10, 20
//! initial_gains = 4, 3, 2
//! gain.c = 1
//! gain.p = 1, 1.5, 2
//! ```
//!
//! Every key is validated; unknown keys are errors. [`Scenario::to_text`] writes
//! the fully resolved scenario (defaults filled, paths absolute) in the same
//! format, and parsing that text gives back an equal `Scenario`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graphnet::{
    self, CouplingMode, CouplingState, Drive, Graph, Network, NetworkScenario, OscillatorParams,
};
use crate::matrix::SquareMatrix;
use crate::odesim::{
    AdaptiveSystem, GainState, IntegratorSettings, StopSettings, SystemKind, SystemScenario,
};
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Classify,
    System1,
    System2,
    ScalarGain,
    NetworkNode,
    NetworkEdge,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Classify,
        ScenarioKind::System1,
        ScenarioKind::System2,
        ScenarioKind::ScalarGain,
        ScenarioKind::NetworkNode,
        ScenarioKind::NetworkEdge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Classify => "classify",
            ScenarioKind::System1 => "system1",
            ScenarioKind::System2 => "system2",
            ScenarioKind::ScalarGain => "scalar_gain",
            ScenarioKind::NetworkNode => "network_node",
            ScenarioKind::NetworkEdge => "network_edge",
        }
    }

    pub fn is_network(self) -> bool {
        matches!(self, ScenarioKind::NetworkNode | ScenarioKind::NetworkEdge)
    }

    pub fn is_system(self) -> bool {
        matches!(
            self,
            ScenarioKind::System1 | ScenarioKind::System2 | ScenarioKind::ScalarGain
        )
    }

    pub fn system_kind(self) -> Option<SystemKind> {
        match self {
            ScenarioKind::System1 => Some(SystemKind::SystemI),
            ScenarioKind::System2 => Some(SystemKind::SystemII),
            ScenarioKind::ScalarGain => Some(SystemKind::ScalarGain),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    File(PathBuf),
    Inline(SquareMatrix),
}

impl MatrixSource {
    pub fn load(&self) -> Result<SquareMatrix> {
        match self {
            MatrixSource::File(p) => SquareMatrix::load(p),
            MatrixSource::Inline(m) => Ok(m.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    ErdosRenyi { n: usize, rho: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateInit {
    Values(Vec<f64>),
    /// Uniform on `[-half_width, half_width]` per component.
    Random { seed: u64, half_width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GainInit {
    Values(Vec<f64>),
    /// Uniform on `(lo, hi]`.
    Random { seed: u64, lo: f64, hi: f64 },
}

/// A scalar broadcast to every channel, or one value per channel.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamVec {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ParamVec {
    pub fn expand(&self, len: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            ParamVec::Scalar(v) => Ok(vec![*v; len]),
            ParamVec::Vector(v) if v.len() == len => Ok(v.clone()),
            ParamVec::Vector(v) => Err(Error::Validation(format!(
                "{name} has {} entries, expected {len}",
                v.len()
            ))),
        }
    }

    fn from_values(v: Vec<f64>) -> Self {
        if v.len() == 1 {
            ParamVec::Scalar(v[0])
        } else {
            ParamVec::Vector(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub kind: ScenarioKind,
    pub matrix_a: Option<MatrixSource>,
    pub matrix_b: Option<MatrixSource>,
    pub graph: Option<GraphSource>,
    pub initial_state: Option<StateInit>,
    pub initial_gains: Option<GainInit>,
    pub gain_c: ParamVec,
    pub gain_p: ParamVec,
    pub oscillator: Option<OscillatorParams>,
    pub integrator: IntegratorSettings,
    pub stop: StopSettings,
    pub frozen_gains: bool,
    pub delta: Option<f64>,
}

/// Keys accepted by the parser.
pub const KNOWN_KEYS: &[&str] = &[
    "name",
    "kind",
    "matrices.A",
    "matrices.B",
    "graph.file",
    "graph.n",
    "graph.rho",
    "graph.seed",
    "initial_state",
    "initial_state.seed",
    "initial_state.box",
    "initial_gains",
    "initial_gains.seed",
    "initial_gains.range",
    "gain.c",
    "gain.p",
    "oscillator.w",
    "oscillator.a",
    "oscillator.b",
    "oscillator.drive",
    "integrator.dt",
    "integrator.horizon",
    "integrator.output_stride",
    "stop.state_eps",
    "stop.sync_eps",
    "stop.hold_time",
    "stop.divergence_cap",
    "frozen_gains",
    "delta",
];

/// Keys whose values are numbers (or numeric lists), i.e. valid sweep targets.
pub const NUMERIC_KEYS: &[&str] = &[
    "graph.n",
    "graph.rho",
    "graph.seed",
    "initial_state",
    "initial_state.seed",
    "initial_state.box",
    "initial_gains",
    "initial_gains.seed",
    "gain.c",
    "gain.p",
    "oscillator.w",
    "oscillator.a",
    "oscillator.b",
    "integrator.dt",
    "integrator.horizon",
    "integrator.output_stride",
    "stop.state_eps",
    "stop.sync_eps",
    "stop.hold_time",
    "stop.divergence_cap",
    "delta",
];

/// Raw `key = value` assignments with their line numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Entries {
    source: String,
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: source.to_string(),
                line: line_no,
                msg: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    path: source.to_string(),
                    line: line_no,
                    msg: "empty key".into(),
                });
            }
            if let Some((prev, _)) = map.insert(key.to_string(), (line_no, value.trim().to_string()))
            {
                return Err(Error::Parse {
                    path: source.to_string(),
                    line: line_no,
                    msg: format!("`{key}` already assigned on line {prev}"),
                });
            }
        }
        Ok(Entries {
            source: source.to_string(),
            map,
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    /// Sets (or replaces) a key; line number 0 marks a programmatic override.
    pub fn set(&mut self, key: &str, value: String) {
        self.map.insert(key.to_string(), (0, value));
    }

    pub fn remove(&mut self, key: &str) {
        self.map.remove(key);
    }

    fn err(&self, key: &str, msg: impl Into<String>) -> Error {
        let line = self.map.get(key).map_or(0, |(l, _)| *l);
        Error::Parse {
            path: self.source.clone(),
            line,
            msg: format!("{key}: {}", msg.into()),
        }
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.map.keys().any(|k| k.starts_with(prefix))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                parse_f64(v).ok_or_else(|| self.err(key, format!("expected a number, found `{v}`")))
            })
            .transpose()
    }

    fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| self.err(key, format!("expected a non-negative integer, found `{v}`")))
            })
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(self.err(key, format!("expected true or false, found `{v}`"))),
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| parse_list(v).ok_or_else(|| self.err(key, format!("expected numbers, found `{v}`"))))
            .transpose()
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Comma- or whitespace-separated numbers, optionally bracketed.
fn parse_list(s: &str) -> Option<Vec<f64>> {
    let s = s.trim().trim_start_matches('[').trim_end_matches(']');
    let vals: Option<Vec<f64>> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(parse_f64)
        .collect();
    vals.filter(|v| !v.is_empty())
}

/// `[a b; c d]`: rows separated by `;`.
fn parse_inline_matrix(s: &str) -> Option<SquareMatrix> {
    let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?;
    let rows: Option<Vec<Vec<f64>>> = inner
        .split(';')
        .map(|r| {
            r.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(parse_f64)
                .collect()
        })
        .collect();
    SquareMatrix::from_rows(&rows?).ok()
}

fn parse_drive(s: &str) -> Option<Drive> {
    let s = s.trim();
    match s {
        "none" | "zero" => return Some(Drive::None),
        "sin" => return Some(Drive::default()),
        _ => {}
    }
    let args = s.strip_prefix("sin(")?.strip_suffix(')')?;
    let v = parse_list(args)?;
    (v.len() == 2).then(|| Drive::Sine {
        amplitude: v[0],
        frequency: v[1],
    })
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

fn fmt_inline_matrix(m: &SquareMatrix) -> String {
    let rows: Vec<String> = (0..m.n())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|v| format!("{v:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    format!("[{}]", rows.join("; "))
}

fn resolve_path(base_dir: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    let joined = if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    };
    std::path::absolute(&joined).unwrap_or(joined)
}

impl Scenario {
    /// Reads and validates a scenario file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Scenario::parse_str(&text, &path.display().to_string(), base)
    }

    pub fn parse_str(text: &str, source: &str, base_dir: &Path) -> Result<Self> {
        Scenario::from_entries(&Entries::parse(text, source)?, base_dir)
    }

    pub fn from_entries(e: &Entries, base_dir: &Path) -> Result<Self> {
        if let Some(key) = e.map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(e.err(key, "unrecognized key"));
        }
        let kind_str = e
            .get("kind")
            .ok_or_else(|| Error::Validation("missing required key `kind`".into()))?;
        let kind = ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == kind_str)
            .ok_or_else(|| e.err("kind", format!("unknown kind `{kind_str}`")))?;

        let matrix = |key: &str| -> Result<Option<MatrixSource>> {
            e.get(key)
                .map(|v| {
                    if v.starts_with('[') {
                        parse_inline_matrix(v)
                            .map(MatrixSource::Inline)
                            .ok_or_else(|| e.err(key, "malformed inline matrix"))
                    } else if v.is_empty() {
                        Err(e.err(key, "empty path"))
                    } else {
                        Ok(MatrixSource::File(resolve_path(base_dir, v)))
                    }
                })
                .transpose()
        };
        let matrix_a = matrix("matrices.A")?;
        let matrix_b = matrix("matrices.B")?;

        let graph = match (e.get("graph.file"), e.has_prefix("graph.n") || e.has_prefix("graph.rho")) {
            (Some(_), true) => {
                return Err(e.err("graph.file", "give either graph.file or graph.n/rho/seed"))
            }
            (Some(p), false) => {
                if e.get("graph.seed").is_some() {
                    return Err(e.err("graph.seed", "graph.seed only applies to generated graphs"));
                }
                Some(GraphSource::File(resolve_path(base_dir, p)))
            }
            (None, true) => Some(GraphSource::ErdosRenyi {
                n: e.usize("graph.n")?
                    .ok_or_else(|| Error::Validation("graph.n is required".into()))?,
                rho: e.f64("graph.rho")?
                    .ok_or_else(|| Error::Validation("graph.rho is required".into()))?,
                seed: e.u64("graph.seed")?.unwrap_or(0),
            }),
            (None, false) => {
                if e.get("graph.seed").is_some() {
                    return Err(e.err("graph.seed", "graph.seed without graph.n/rho"));
                }
                None
            }
        };

        let initial_state = match (
            e.list("initial_state")?,
            e.u64("initial_state.seed")?,
            e.f64("initial_state.box")?,
        ) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(e.err("initial_state", "give either values or seed/box, not both"))
            }
            (Some(v), None, None) => Some(StateInit::Values(v)),
            (None, None, None) if kind.is_network() => Some(StateInit::Random {
                seed: 0,
                half_width: 3.0,
            }),
            (None, None, None) => None,
            (None, seed, half_width) => Some(StateInit::Random {
                seed: seed.unwrap_or(0),
                half_width: half_width.unwrap_or(if kind.is_network() { 3.0 } else { 1.0 }),
            }),
        };

        let initial_gains = match (
            e.list("initial_gains")?,
            e.u64("initial_gains.seed")?,
            e.list("initial_gains.range")?,
        ) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(e.err("initial_gains", "give either values or seed/range, not both"))
            }
            (Some(v), None, None) => Some(GainInit::Values(v)),
            (None, None, None) if !kind.is_network() => None,
            (None, seed, range) => {
                let (lo, hi) = match range.as_deref() {
                    None => (0.0, 1.0),
                    Some([lo, hi]) => (*lo, *hi),
                    Some(_) => {
                        return Err(e.err("initial_gains.range", "expected two numbers `lo, hi`"))
                    }
                };
                Some(GainInit::Random {
                    seed: seed.unwrap_or(1),
                    lo,
                    hi,
                })
            }
        };

        let gain_c = e.list("gain.c")?.map_or(ParamVec::Scalar(1.0), ParamVec::from_values);
        let gain_p = e.list("gain.p")?.map_or(ParamVec::Scalar(1.0), ParamVec::from_values);

        let oscillator = if e.has_prefix("oscillator.") {
            let d = OscillatorParams::default();
            let drive = match e.get("oscillator.drive") {
                None => d.drive,
                Some(v) => parse_drive(v).ok_or_else(|| {
                    e.err("oscillator.drive", format!("expected sin, none or sin(amp, freq), found `{v}`"))
                })?,
            };
            Some(OscillatorParams {
                w: e.f64("oscillator.w")?.unwrap_or(d.w),
                a: e.f64("oscillator.a")?.unwrap_or(d.a),
                b: e.f64("oscillator.b")?.unwrap_or(d.b),
                drive,
            })
        } else {
            None
        };

        let network = kind.is_network();
        let integrator = IntegratorSettings {
            dt: e.f64("integrator.dt")?.unwrap_or(1e-3),
            horizon: e
                .f64("integrator.horizon")?
                .unwrap_or(if network { 50.0 } else { 30.0 }),
            output_stride: e.usize("integrator.output_stride")?.unwrap_or(1),
        };
        let (eps_key, wrong_key) = if network {
            ("stop.sync_eps", "stop.state_eps")
        } else {
            ("stop.state_eps", "stop.sync_eps")
        };
        if e.get(wrong_key).is_some() {
            return Err(e.err(wrong_key, format!("not applicable to kind {}", kind.as_str())));
        }
        let stop = StopSettings {
            eps: e.f64(eps_key)?.unwrap_or(if network { 1e-4 } else { 1e-8 }),
            hold_time: e
                .f64("stop.hold_time")?
                .unwrap_or(if network { 2.0 } else { 1.0 }),
            divergence_cap: e.f64("stop.divergence_cap")?.unwrap_or(1e12),
        };

        let sc = Scenario {
            name: e.get("name").map(str::to_string),
            kind,
            matrix_a,
            matrix_b,
            graph,
            initial_state,
            initial_gains,
            gain_c,
            gain_p,
            oscillator,
            integrator,
            stop,
            frozen_gains: e.bool("frozen_gains")?.unwrap_or(false),
            delta: e.f64("delta")?,
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Kind-specific invariants that can be checked without touching files.
    pub fn validate(&self) -> Result<()> {
        let v = |msg: &str| Err(Error::Validation(msg.to_string()));
        let kind = self.kind;
        match kind {
            ScenarioKind::Classify => {
                if self.matrix_a.is_none() && self.matrix_b.is_none() {
                    return v("classify needs matrices.B (or matrices.A)");
                }
            }
            _ if kind.is_system() => {
                if self.matrix_a.is_none() || self.matrix_b.is_none() {
                    return v("system kinds need matrices.A and matrices.B");
                }
                if self.initial_state.is_none() {
                    return v("system kinds need initial_state");
                }
                if self.initial_gains.is_none() {
                    return v("system kinds need initial_gains");
                }
                if self.graph.is_some() || self.oscillator.is_some() {
                    return v("graph and oscillator keys only apply to network kinds");
                }
            }
            _ => {
                if self.graph.is_none() {
                    return v("network kinds need a graph (graph.file or graph.n/rho/seed)");
                }
                if self.oscillator.is_none() {
                    return v("network kinds need oscillator parameters");
                }
                if self.matrix_a.is_some() || self.matrix_b.is_some() {
                    return v("matrices only apply to classify and system kinds");
                }
            }
        }
        if !kind.is_system() && kind != ScenarioKind::Classify && self.delta.is_some() {
            return v("delta only applies to system1 and system2");
        }
        if let Some(d) = self.delta {
            if !matches!(kind, ScenarioKind::System1 | ScenarioKind::System2) {
                return v("delta only applies to system1 and system2");
            }
            if !(d > 0.0) {
                return v("delta must be positive");
            }
        }
        if kind != ScenarioKind::Classify {
            self.integrator.validate()?;
            self.stop.validate()?;
        }
        for (name, pv, min, strict) in [
            ("gain.c", &self.gain_c, 0.0, true),
            ("gain.p", &self.gain_p, 1.0, false),
        ] {
            let vals = match pv {
                ParamVec::Scalar(x) => std::slice::from_ref(x),
                ParamVec::Vector(v) => v.as_slice(),
            };
            if vals.iter().any(|x| if strict { *x <= min } else { *x < min }) {
                return Err(Error::Validation(format!(
                    "{name} must be {} {min}",
                    if strict { ">" } else { ">=" }
                )));
            }
        }
        if let Some(GraphSource::ErdosRenyi { n, rho, .. }) = &self.graph {
            if *n < 2 {
                return v("graph.n must be at least 2");
            }
            if !(*rho > 0.0 && *rho <= 1.0) {
                return v("graph.rho must lie in (0, 1]");
            }
        }
        if let Some(StateInit::Random { half_width, .. }) = &self.initial_state {
            if !(*half_width > 0.0) {
                return v("initial_state.box must be positive");
            }
        }
        match &self.initial_gains {
            Some(GainInit::Values(k)) if k.iter().any(|k| *k <= 0.0) => {
                return v("initial_gains must be positive")
            }
            Some(GainInit::Random { lo, hi, .. }) if !(*lo >= 0.0 && hi > lo) => {
                return v("initial_gains.range needs 0 <= lo < hi")
            }
            _ => {}
        }
        if let Some(osc) = &self.oscillator {
            osc.validate()?;
        }
        Ok(())
    }

    /// Fully resolved scenario in the input format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(name) = &self.name {
            put("name", name.clone());
        }
        put("kind", self.kind.as_str().into());
        for (key, m) in [("matrices.A", &self.matrix_a), ("matrices.B", &self.matrix_b)] {
            match m {
                Some(MatrixSource::File(p)) => put(key, p.display().to_string()),
                Some(MatrixSource::Inline(m)) => put(key, fmt_inline_matrix(m)),
                None => {}
            }
        }
        match &self.graph {
            Some(GraphSource::File(p)) => put("graph.file", p.display().to_string()),
            Some(GraphSource::ErdosRenyi { n, rho, seed }) => {
                put("graph.n", n.to_string());
                put("graph.rho", format!("{rho:?}"));
                put("graph.seed", seed.to_string());
            }
            None => {}
        }
        match &self.initial_state {
            Some(StateInit::Values(v)) => put("initial_state", fmt_list(v)),
            Some(StateInit::Random { seed, half_width }) => {
                put("initial_state.seed", seed.to_string());
                put("initial_state.box", format!("{half_width:?}"));
            }
            None => {}
        }
        match &self.initial_gains {
            Some(GainInit::Values(v)) => put("initial_gains", fmt_list(v)),
            Some(GainInit::Random { seed, lo, hi }) => {
                put("initial_gains.seed", seed.to_string());
                put("initial_gains.range", fmt_list(&[*lo, *hi]));
            }
            None => {}
        }
        for (key, pv) in [("gain.c", &self.gain_c), ("gain.p", &self.gain_p)] {
            match pv {
                ParamVec::Scalar(x) => put(key, format!("{x:?}")),
                ParamVec::Vector(v) => put(key, fmt_list(v)),
            }
        }
        if let Some(o) = &self.oscillator {
            put("oscillator.w", format!("{:?}", o.w));
            put("oscillator.a", format!("{:?}", o.a));
            put("oscillator.b", format!("{:?}", o.b));
            put(
                "oscillator.drive",
                match o.drive {
                    Drive::None => "none".into(),
                    Drive::Sine {
                        amplitude,
                        frequency,
                    } => format!("sin({amplitude:?}, {frequency:?})"),
                },
            );
        }
        put("integrator.dt", format!("{:?}", self.integrator.dt));
        put("integrator.horizon", format!("{:?}", self.integrator.horizon));
        put("integrator.output_stride", self.integrator.output_stride.to_string());
        let eps_key = if self.kind.is_network() {
            "stop.sync_eps"
        } else {
            "stop.state_eps"
        };
        put(eps_key, format!("{:?}", self.stop.eps));
        put("stop.hold_time", format!("{:?}", self.stop.hold_time));
        put("stop.divergence_cap", format!("{:?}", self.stop.divergence_cap));
        put("frozen_gains", self.frozen_gains.to_string());
        if let Some(d) = self.delta {
            put("delta", format!("{d:?}"));
        }
        s
    }

    /// The echo as raw entries, for programmatic overrides (sweeps).
    pub fn to_entries(&self) -> Entries {
        Entries::parse(&self.to_text(), "<echo>").expect("echo is always well-formed")
    }

    /// Loads matrices/graphs and materializes random initial conditions.
    pub fn resolve(&self) -> Result<Resolved> {
        self.validate()?;
        match self.kind {
            ScenarioKind::Classify => {
                let src = self.matrix_b.as_ref().or(self.matrix_a.as_ref()).expect("validated");
                Ok(Resolved::Classify(src.load()?))
            }
            kind if kind.is_system() => {
                let a = self.matrix_a.as_ref().expect("validated").load()?;
                let b = self.matrix_b.as_ref().expect("validated").load()?;
                let sys_kind = kind.system_kind().expect("system kind");
                let system = AdaptiveSystem::new(sys_kind, a, b)?.with_frozen_gains(self.frozen_gains);
                let n = system.n();
                let x0 = match self.initial_state.as_ref().expect("validated") {
                    StateInit::Values(v) => v.clone(),
                    StateInit::Random { seed, half_width } => {
                        sampling::uniform_box(n, *half_width, *seed)
                    }
                };
                if x0.len() != n {
                    return Err(Error::Validation(format!(
                        "initial_state has {} entries, system dimension is {n}",
                        x0.len()
                    )));
                }
                let glen = system.gain_len();
                let k0 = self.gains0(glen)?;
                let gains = GainState::new(
                    k0,
                    self.gain_c.expand(glen, "gain.c")?,
                    self.gain_p.expand(glen, "gain.p")?,
                )?;
                Ok(Resolved::System(SystemScenario {
                    system,
                    x0,
                    gains,
                    integrator: self.integrator,
                    stop: self.stop,
                }))
            }
            kind => {
                let (graph, seed_used) = match self.graph.as_ref().expect("validated") {
                    GraphSource::File(p) => (Graph::load(p)?, None),
                    GraphSource::ErdosRenyi { n, rho, seed } => {
                        let (g, s) = graphnet::erdos_renyi(*n, *rho, *seed)?;
                        (g, Some(s))
                    }
                };
                let mode = if kind == ScenarioKind::NetworkNode {
                    CouplingMode::Node
                } else {
                    CouplingMode::Edge
                };
                let network = Network::new(graph, self.oscillator.expect("validated"), mode)
                    .with_frozen_weights(self.frozen_gains);
                let n2 = 2 * network.graph().n_nodes();
                let z0 = match self.initial_state.as_ref().expect("network default") {
                    StateInit::Values(v) => v.clone(),
                    StateInit::Random { seed, half_width } => {
                        sampling::uniform_box(n2, *half_width, *seed)
                    }
                };
                if z0.len() != n2 {
                    return Err(Error::Validation(format!(
                        "initial_state has {} entries, network needs {n2} (x, y per node)",
                        z0.len()
                    )));
                }
                let wlen = network.weight_len();
                let coupling = CouplingState::new(
                    mode,
                    self.gains0(wlen)?,
                    self.gain_c.expand(wlen, "gain.c")?,
                    self.gain_p.expand(wlen, "gain.p")?,
                )?;
                Ok(Resolved::Network {
                    scenario: NetworkScenario {
                        network,
                        initial_states: z0,
                        coupling,
                        integrator: self.integrator,
                        stop: self.stop,
                    },
                    graph_seed_used: seed_used,
                })
            }
        }
    }

    fn gains0(&self, len: usize) -> Result<Vec<f64>> {
        match self.initial_gains.as_ref().expect("validated") {
            GainInit::Values(v) if v.len() == len => Ok(v.clone()),
            GainInit::Values(v) => Err(Error::Validation(format!(
                "initial_gains has {} entries, expected {len}",
                v.len()
            ))),
            GainInit::Random { seed, lo, hi } => Ok(sampling::uniform_half_open(len, *lo, *hi, *seed)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Resolved {
    Classify(SquareMatrix),
    System(SystemScenario),
    Network {
        scenario: NetworkScenario,
        graph_seed_used: Option<u64>,
    },
}
