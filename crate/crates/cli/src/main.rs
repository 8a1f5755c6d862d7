use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hgain::runner::{self, EXIT_INTERNAL, EXIT_IO, EXIT_OK};
use hgain::scenario::Scenario;

/// Environment variable holding the default sweep worker count.
const WORKERS_ENV: &str = "HGAIN_WORKERS";

#[derive(Parser)]
#[command(name = "hgain", version, about = "Distributed adaptive high-gain stabilization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the scenario's matrix (B, or A if no B) and print JSON.
    Classify { scenario: PathBuf },
    /// Run a scenario and write trajectory.csv, report.json and scenario.scn.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario once per value of a numeric field.
    Sweep {
        scenario: PathBuf,
        /// Dotted scenario key, e.g. `gain.c` or `integrator.dt`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Parallel runs (default: $HGAIN_WORKERS, else the number of CPUs).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn load(path: &PathBuf) -> Result<Scenario, i32> {
    Scenario::load(path).map_err(|e| {
        eprintln!("error: {e}");
        runner::exit_code_for(&e)
    })
}

fn execute(cli: Cli) -> Result<i32, i32> {
    match cli.command {
        Command::Classify { scenario } => {
            let sc = load(&scenario)?;
            let c = runner::classify_scenario(&sc).map_err(|e| {
                eprintln!("error: {e}");
                runner::exit_code_for(&e)
            })?;
            let json = serde_json::to_string_pretty(&c).map_err(|_| EXIT_INTERNAL)?;
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{json}");
            Ok(EXIT_OK)
        }
        Command::Simulate { scenario, out } => {
            let sc = load(&scenario)?;
            let outcome = runner::run(&sc, &out).map_err(|e| {
                eprintln!("error: {e}");
                runner::exit_code_for(&e)
            })?;
            let r = &outcome.report;
            println!(
                "{}: diverged={} success={} settle_time={:?} final_gain_max={:?}",
                sc.kind.as_str(),
                r.diverged(),
                r.success_flag(),
                r.settle_time(),
                r.final_gain_max()
            );
            println!("report: {}", outcome.artifacts.report_path.display());
            Ok(outcome.exit_code())
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out,
            workers,
        } => {
            let sc = load(&scenario)?;
            let workers = workers.unwrap_or_else(default_workers);
            let entries = runner::sweep(&sc, &param, &values, &out, workers).map_err(|e| {
                eprintln!("error: {e}");
                runner::exit_code_for(&e)
            })?;
            for e in &entries {
                match &e.result {
                    Ok(o) => println!(
                        "{param} = {}: diverged={} success={} settle_time={:?}",
                        e.value,
                        o.report.diverged(),
                        o.report.success_flag(),
                        o.report.settle_time()
                    ),
                    Err(msg) => println!("{param} = {}: error: {msg}", e.value),
                }
            }
            println!("summary: {}", out.join("summary.csv").display());
            Ok(EXIT_OK)
        }
        Command::Selftest { seed } => {
            let results = hgain::selftest::run_all(seed);
            let mut all = true;
            for r in &results {
                println!(
                    "[{}] {} {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
                all &= r.passed;
            }
            Ok(if all { EXIT_OK } else { EXIT_INTERNAL })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = execute(cli).unwrap_or_else(|code| code);
    ExitCode::from(code as u8)
}
