//! Executes scenarios and writes their artifacts.
//!
//! Each run writes into its own directory:
//!
//! * `trajectory.csv`: recorded samples (not written for `classify`),
//! * `report.json`: classification, convergence or synchronization report,
//! * `scenario.scn`: the resolved scenario, seeds included,
//! * `graph.txt`: the network topology (network kinds only).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphnet::{self, SyncReport};
use crate::matana::{self, Classification};
use crate::odesim::{self, ConvergenceReport, ScalingSide, Termination};
use crate::scenario::{GraphSource, Resolved, Scenario, ScenarioKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Process exit code for an error that aborted a run.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Hypothesis(_) => EXIT_HYPOTHESIS,
        Error::ConvergenceFailure | Error::InsufficientData { .. } | Error::NonFinite { .. } => {
            EXIT_INTERNAL
        }
        _ => EXIT_IO,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub trajectory_path: Option<PathBuf>,
    pub report_path: PathBuf,
    pub scenario_path: PathBuf,
    pub scenario_echo: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemReport {
    pub kind: &'static str,
    pub termination: Termination,
    pub convergence: ConvergenceReport,
    pub steps_recorded: usize,
    pub end_time: f64,
    pub b_classification: Classification,
    /// Gain thresholds for the requested `delta` (systems I and II).
    pub threshold_gains: Option<Vec<f64>>,
    /// First recorded time at which every gain exceeded its threshold.
    pub threshold_time: Option<f64>,
    /// Fitted slope of `ln ||x||_inf` after the threshold time (or over the
    /// second half of the run).
    pub decay_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkReport {
    pub kind: &'static str,
    pub n_nodes: usize,
    pub m_edges: usize,
    pub graph_seed_used: Option<u64>,
    pub termination: Termination,
    pub sync: SyncReport,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunReport {
    Classify(Classification),
    System(Box<SystemReport>),
    Network(Box<NetworkReport>),
}

impl RunReport {
    pub fn diverged(&self) -> bool {
        let term = match self {
            RunReport::Classify(_) => return false,
            RunReport::System(r) => r.termination,
            RunReport::Network(r) => r.termination,
        };
        matches!(term, Termination::Diverged { .. })
    }

    /// Converged (systems), synchronized (networks) or H-matrix (classify).
    pub fn success_flag(&self) -> bool {
        match self {
            RunReport::Classify(c) => c.is_h_matrix,
            RunReport::System(r) => r.convergence.converged,
            RunReport::Network(r) => r.sync.synchronized,
        }
    }

    pub fn settle_time(&self) -> Option<f64> {
        match self {
            RunReport::Classify(_) => None,
            RunReport::System(r) => r.convergence.settle_time,
            RunReport::Network(r) => r.sync.settle_time,
        }
    }

    pub fn final_gain_max(&self) -> Option<f64> {
        let g = match self {
            RunReport::Classify(_) => return None,
            RunReport::System(r) => &r.convergence.final_gains,
            RunReport::Network(r) => &r.sync.final_weights,
        };
        Some(g.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    fn to_json(&self) -> Result<String> {
        Ok(match self {
            RunReport::Classify(c) => serde_json::to_string_pretty(c)?,
            RunReport::System(r) => serde_json::to_string_pretty(r)?,
            RunReport::Network(r) => serde_json::to_string_pretty(r)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub artifacts: RunArtifacts,
    pub report: RunReport,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.diverged() {
            EXIT_DIVERGED
        } else {
            EXIT_OK
        }
    }
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_all(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Classification of a single matrix, as printed by `hgain classify`.
pub fn classify_scenario(scenario: &Scenario) -> Result<Classification> {
    let src = scenario
        .matrix_b
        .as_ref()
        .or(scenario.matrix_a.as_ref())
        .ok_or_else(|| Error::Validation("scenario has no matrix to classify".into()))?;
    matana::classify(&src.load()?, matana::DEFAULT_TOL)
}

/// Runs one scenario and writes its artifacts into `out_dir` (created if needed).
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<RunOutcome> {
    let resolved = scenario.resolve()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut echo = scenario.clone();
    let report_path = out_dir.join("report.json");
    let scenario_path = out_dir.join("scenario.scn");
    let mut trajectory_path = None;

    let report = match resolved {
        Resolved::Classify(m) => RunReport::Classify(matana::classify(&m, matana::DEFAULT_TOL)?),
        Resolved::System(sc) => {
            let b_classification = matana::classify(&sc.system.b, matana::DEFAULT_TOL)?;
            let threshold_gains = match scenario.delta {
                Some(delta) => {
                    let side = ScalingSide::for_kind(sc.system.kind).expect("validated");
                    let th = odesim::estimate_threshold_gains(&sc.system.a, &sc.system.b, delta, side)
                        .ok_or_else(|| {
                            Error::Hypothesis(
                                "B is not an H-matrix with positive diagonal; no gain threshold exists"
                                    .into(),
                            )
                        })?;
                    Some(th)
                }
                None => None,
            };
            let traj = odesim::simulate(&sc)?;
            let path = out_dir.join("trajectory.csv");
            let mut w = create_file(&path)?;
            traj.write_csv(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(&path, e))?;
            trajectory_path = Some(path);

            let threshold_time = threshold_gains
                .as_ref()
                .and_then(|th| traj.threshold_crossing_time(th));
            let fit_from = threshold_time.unwrap_or(0.5 * traj.end_time());
            RunReport::System(Box::new(SystemReport {
                kind: scenario.kind.as_str(),
                termination: traj.termination,
                convergence: ConvergenceReport::from_trajectory(&traj),
                steps_recorded: traj.len(),
                end_time: traj.end_time(),
                b_classification,
                threshold_gains,
                threshold_time,
                decay_rate: odesim::exponential_rate_fit(&traj, fit_from).ok(),
            }))
        }
        Resolved::Network {
            scenario: net,
            graph_seed_used,
        } => {
            if let (Some(GraphSource::ErdosRenyi { seed, .. }), Some(used)) =
                (echo.graph.as_mut(), graph_seed_used)
            {
                *seed = used;
            }
            let graph_path = out_dir.join("graph.txt");
            write_all(&graph_path, &net.network.graph().to_text())?;
            let (traj, sync) = graphnet::simulate_network(&net)?;
            let path = out_dir.join("trajectory.csv");
            let mut w = create_file(&path)?;
            graphnet::write_network_csv(&traj, &sync, &mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(&path, e))?;
            trajectory_path = Some(path);
            RunReport::Network(Box::new(NetworkReport {
                kind: scenario.kind.as_str(),
                n_nodes: net.network.graph().n_nodes(),
                m_edges: net.network.graph().m_edges(),
                graph_seed_used,
                termination: traj.termination,
                sync,
            }))
        }
    };

    write_all(&report_path, &report.to_json()?)?;
    write_all(&scenario_path, &echo.to_text())?;
    Ok(RunOutcome {
        artifacts: RunArtifacts {
            trajectory_path,
            report_path,
            scenario_path,
            scenario_echo: echo,
        },
        report,
    })
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub value: f64,
    pub run_dir: PathBuf,
    pub result: std::result::Result<RunOutcome, String>,
}

/// One run per value of `parameter` (a dotted scenario key), each in
/// `out_dir/run_NNN`, at most `workers` at a time. Failed runs are recorded and
/// the sweep continues. Writes `out_dir/summary.csv`.
pub fn sweep(
    base: &Scenario,
    parameter: &str,
    values: &[f64],
    out_dir: &Path,
    workers: usize,
) -> Result<Vec<SweepEntry>> {
    if !crate::scenario::NUMERIC_KEYS.contains(&parameter) {
        return Err(Error::Validation(format!(
            "`{parameter}` is not a numeric scenario field"
        )));
    }
    if parameter.starts_with("graph.") && base.kind != ScenarioKind::NetworkNode && base.kind != ScenarioKind::NetworkEdge {
        return Err(Error::Validation(format!(
            "`{parameter}` does not apply to kind {}",
            base.kind.as_str()
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let base_entries = base.to_entries();
    let run_one = |(idx, value): (usize, &f64)| -> SweepEntry {
        let run_dir = out_dir.join(format!("run_{idx:03}"));
        let mut entries = base_entries.clone();
        // A value for one form of an initializer replaces the other form.
        match parameter {
            "initial_state" => {
                entries.remove("initial_state.seed");
                entries.remove("initial_state.box");
            }
            "initial_state.seed" | "initial_state.box" => entries.remove("initial_state"),
            "initial_gains" => {
                entries.remove("initial_gains.seed");
                entries.remove("initial_gains.range");
            }
            "initial_gains.seed" => entries.remove("initial_gains"),
            _ => {}
        }
        let text = if parameter.ends_with("seed") || parameter == "graph.n" || parameter.ends_with("stride") {
            format!("{}", *value as u64)
        } else {
            format!("{value:?}")
        };
        entries.set(parameter, text);
        let result = Scenario::from_entries(&entries, Path::new("."))
            .and_then(|sc| run(&sc, &run_dir))
            .map_err(|e| e.to_string());
        SweepEntry {
            value: *value,
            run_dir,
            result,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))?;
    let entries: Vec<SweepEntry> =
        pool.install(|| values.par_iter().enumerate().map(run_one).collect());

    let path = out_dir.join("summary.csv");
    let mut w = create_file(&path)?;
    let fmt_opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.16e}"));
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "value,status,settle_time,final_gain_max,flag,run_dir")?;
        for e in &entries {
            let dir = e.run_dir.display();
            match &e.result {
                Ok(out) => writeln!(
                    w,
                    "{:.16e},{},{},{},{},{dir}",
                    e.value,
                    if out.report.diverged() { "diverged" } else { "ok" },
                    fmt_opt(out.report.settle_time()),
                    fmt_opt(out.report.final_gain_max()),
                    out.report.success_flag(),
                )?,
                Err(msg) => writeln!(
                    w,
                    "{:.16e},error: {},,,false,{dir}",
                    e.value,
                    msg.replace([',', '\n'], ";")
                )?,
            }
        }
        w.flush()
    };
    write().map_err(|e| Error::io(&path, e))?;
    Ok(entries)
}
