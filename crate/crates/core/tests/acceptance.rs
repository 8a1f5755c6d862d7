//! Acceptance criteria. Runs as a plain binary (no libtest harness) and prints
//! one `[criterion N] PASS|FAIL` line per criterion; exits nonzero on any
//! failure.

mod common;

use std::time::{Duration, Instant};

use hgain::graphnet::{self, CouplingMode};
use hgain::matana::{self, Norm, DEFAULT_TOL};
use hgain::odesim::{
    self, AdaptiveSystem, GainState, IntegratorSettings, ScalingSide, StopSettings, SystemKind,
    SystemScenario, Termination, Trajectory,
};
use hgain::scenario::{Resolved, Scenario};
use hgain::{sampling, SquareMatrix};
use nalgebra::DMatrix;
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn system_scenario(name: &str) -> SystemScenario {
    let sc = Scenario::load(&common::scenarios_dir().join(name)).unwrap();
    match sc.resolve().unwrap() {
        Resolved::System(s) => s,
        other => panic!("{name}: expected a system scenario, got {other:?}"),
    }
}

fn gains_monotone(traj: &Trajectory) -> bool {
    traj.gains
        .windows(2)
        .all(|w| w[1].iter().zip(&w[0]).all(|(a, b)| a >= b))
}

fn max_rel_err(got: &[f64], want: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(g, w)| ((g - w) / w).abs())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let spectrum = |file: &str| {
        let c = matana::classify(&common::load_matrix(file), DEFAULT_TOL).unwrap();
        (c.is_h_matrix, c.eigenvalues_of_comparison)
    };
    let close = |got: &[[f64; 2]], want: &[[f64; 2]]| {
        got.len() == want.len()
            && got
                .iter()
                .zip(want)
                .all(|(g, w)| (g[0] - w[0]).abs() < 1e-3 && (g[1] - w[1]).abs() < 1e-3)
    };
    let (h3, ev3) = spectrum("plant3_B.mat");
    check(h3, "3x3 B not classified H")?;
    check(
        close(&ev3, &[[0.3184, 0.0], [7.1705, 0.0], [10.5111, 0.0]]),
        format!("3x3 spectrum {ev3:?}"),
    )?;
    let (h5, ev5) = spectrum("plant5_B.mat");
    check(h5, "5x5 B not classified H")?;
    let want5 = [
        [0.0456, 0.0],
        [1.0995, 0.0],
        [1.3645, 0.0],
        [1.5474, -0.1286],
        [1.5474, 0.1286],
    ];
    check(close(&ev5, &want5), format!("5x5 spectrum {ev5:?}"))?;
    let (h2, _) = spectrum("nonh2_B.mat");
    check(!h2, "2x2 B classified H")?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("3 matrices classified, spectra within 1e-3, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let sc = system_scenario("system2_plant5.scn");
    check(sc.integrator.dt == 1e-3, "scenario dt is not 1e-3")?;
    let traj = odesim::simulate(&sc).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(traj.termination == Termination::Converged, format!("{:?}", traj.termination))?;
    let settle = traj.settle_time.unwrap();
    let i = traj.times.partition_point(|t| *t < settle);
    let sustained = traj.states[i..].iter().all(|x| x.iter().all(|v| v.abs() < 1e-8));
    check(sustained, "state left the 1e-8 ball after settling")?;
    let want = [12.2056, 9.1612, 11.2881, 14.4884, 9.5236];
    let err = max_rel_err(traj.final_gains(), &want);
    check(err < 0.02, format!("gains {:?}, max rel err {err:.3e}", traj.final_gains()))?;
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "max rel gain err {err:.2e}, settled at t={settle:.3} held to t={:.3}, {elapsed:.2?}",
        traj.end_time()
    ))
}

fn criterion_3() -> Outcome {
    let reach = |t: &Trajectory| {
        t.states
            .iter()
            .position(|x| x.iter().all(|v| v.abs() < 1e-4))
            .map(|i| t.times[i])
    };
    let mut out = Vec::new();
    let mut times = Vec::new();
    for name in ["system1_plant3.scn", "system1_plant3_fast.scn"] {
        let traj = odesim::simulate(&system_scenario(name)).map_err(|e| e.to_string())?;
        check(traj.termination == Termination::Converged, format!("{name}: {:?}", traj.termination))?;
        check(gains_monotone(&traj), format!("{name}: gains not monotone"))?;
        let tail = traj.tail_gain_growth(0.1);
        check(tail < 1e-6, format!("{name}: tail growth {tail:e}"))?;
        let t = reach(&traj).ok_or(format!("{name}: never below 1e-4"))?;
        times.push(t);
        out.push(format!("{name} reaches 1e-4 at t={t:.3}"));
    }
    check(times[1] <= times[0], "fast set is slower")?;
    Ok(out.join("; "))
}

fn criterion_4() -> Outcome {
    let sc = system_scenario("diagonal_gain_unstable.scn");
    check(sc.system.frozen && sc.gains.k == [1.0, 4.0], "scenario is not frozen K = diag(1, 4)")?;
    check(sc.system.a.as_slice().iter().all(|v| *v == 0.0), "A is not zero")?;
    let traj = odesim::simulate(&sc).map_err(|e| e.to_string())?;
    let t = match traj.termination {
        Termination::Diverged { t, .. } => t,
        other => return Err(format!("did not diverge: {other:?}")),
    };
    check(t < 20.0, format!("diverged only at t={t}"))?;
    let minus_kb = sc.system.b.scale_rows(&sc.gains.k).scale(-1.0);
    let ev = matana::eigenvalues(&minus_kb).map_err(|e| e.to_string())?;
    check(ev.iter().all(|z| (z.re - 1.0).abs() < 1e-9), format!("eigenvalues {ev:?}"))?;
    Ok(format!("divergence flagged at t={t:.3}; Re lambda(-KB) = 1"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = sampling::rng(5);
    let mut worst = f64::INFINITY;
    for trial in 0..100u64 {
        let n = rng.random_range(2..=6);
        let a = common::hurwitz_row_dominant(&mut rng, n);
        let sc = SystemScenario {
            system: AdaptiveSystem::new(SystemKind::SystemI, a.clone(), SquareMatrix::zeros(n))
                .unwrap()
                .with_frozen_gains(true),
            x0: sampling::uniform_box(n, 10.0, 1000 + trial),
            gains: GainState::new(vec![1.0; n], vec![1.0; n], vec![1.0; n]).unwrap(),
            integrator: IntegratorSettings {
                dt: 1e-3,
                horizon: 5.0,
                output_stride: 1,
            },
            stop: StopSettings {
                eps: 1e-300,
                ..StopSettings::default()
            },
        };
        let traj = odesim::simulate(&sc).map_err(|e| e.to_string())?;
        let c = odesim::coppel_check(&traj, |_| a.clone(), Norm::Inf, 0.01).map_err(|e| e.to_string())?;
        check(c.holds, format!("trial {trial} (n={n}): {c:?}"))?;
        worst = worst.min(c.upper_margin).min(c.lower_margin);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("100 systems, worst relative margin {worst:.2e}, {elapsed:.2?}"))
}

fn criterion_6() -> Outcome {
    let mut rng = sampling::rng(6);
    let mut counts = [0usize; 2];
    for i in 0..200 {
        let n = rng.random_range(2..=8);
        let expect_h = i % 2 == 0;
        let a = if expect_h {
            common::constructed_h(&mut rng, n)
        } else {
            common::perturbed_non_h(&mut rng, n)
        };
        let h = matana::is_h_matrix(&a, DEFAULT_TOL);
        let row = matana::find_row_scaling(&a, DEFAULT_TOL);
        let col = matana::find_column_scaling(&a, DEFAULT_TOL);
        let row_ok = row
            .as_ref()
            .map(|d| matana::is_generalized_row_dominant(&a, d).unwrap());
        let col_ok = col
            .as_ref()
            .map(|d| matana::is_generalized_column_dominant(&a, d).unwrap());
        check(row_ok != Some(false) && col_ok != Some(false), format!("matrix {i}: scaling fails to certify"))?;
        let certified = row_ok == Some(true) && col_ok == Some(true);
        let votes = [h, row.is_some(), col.is_some(), certified];
        check(votes.iter().all(|v| *v == votes[0]), format!("matrix {i}: votes {votes:?}"))?;
        check(h == expect_h, format!("matrix {i}: expected H = {expect_h}"))?;
        counts[h as usize] += 1;
    }
    Ok(format!("200 matrices unanimous ({} H, {} non-H)", counts[1], counts[0]))
}

fn criterion_7() -> Outcome {
    let mut rng = sampling::rng(7);
    let mut trees = 0;
    for trial in 0..50u64 {
        let n = rng.random_range(2..=15);
        let rho = rng.random_range(0.15..0.9);
        let (g, _) = graphnet::erdos_renyi(n, rho, 7000 + trial * 1000).map_err(|e| e.to_string())?;
        let k_hat: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..3.0)).collect();
        let k: Vec<f64> = k_hat.iter().map(|v| v + rng.random_range(0.01..2.0)).collect();
        let spectrum = |w: &[f64]| -> Vec<f64> {
            let m: DMatrix<f64> = graphnet::edge_laplacian(&g, w).unwrap();
            let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev
        };
        let (big, small) = (spectrum(&k), spectrum(&k_hat));
        let kappa = g.m_edges() + 1 - n;
        trees += (kappa == 0) as usize;
        let zeros = |ev: &[f64]| ev.iter().filter(|v| v.abs() < 1e-9).count();
        check(
            zeros(&big) == kappa && zeros(&small) == kappa,
            format!("trial {trial}: zero counts {} {} vs {kappa}", zeros(&big), zeros(&small)),
        )?;
        let strict = big[kappa..].iter().zip(&small[kappa..]).all(|(b, s)| b > s);
        check(strict, format!("trial {trial}: eigenvalues not strictly larger"))?;
    }
    Ok(format!("50 graphs ({trees} trees), zero counts and strict ordering hold"))
}

fn network_criterion(name: &str, limit: Duration) -> Result<String, String> {
    let start = Instant::now();
    let sc = Scenario::load(&common::scenarios_dir().join(name)).map_err(|e| e.to_string())?;
    let Resolved::Network { scenario, .. } = sc.resolve().map_err(|e| e.to_string())? else {
        return Err(format!("{name} is not a network scenario"));
    };
    check(scenario.network.mode == CouplingMode::Node, "expected node coupling")?;
    let n = scenario.network.graph().n_nodes();
    let (traj, rep) = graphnet::simulate_network(&scenario).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(rep.synchronized, format!("{name}: not synchronized, final e = {:e}", rep.final_sync_error))?;
    let settle = rep.settle_time.unwrap();
    let i = traj.times.partition_point(|t| *t < settle);
    check(rep.sync_error_history[i..].iter().all(|e| *e < 1e-4), "sync error left 1e-4")?;
    check(gains_monotone(&traj), "weights not monotone")?;
    check(rep.final_weights.len() == n, "expected one weight per node")?;
    check(rep.weight_growth_tail < 1e-6, format!("tail growth {:e}", rep.weight_growth_tail))?;
    check(rep.max_weight.is_finite(), "unbounded weights")?;
    within(elapsed, limit)?;
    Ok(format!(
        "n={n} synced at t={settle:.2}, max weight {:.3}, {elapsed:.2?}",
        rep.max_weight
    ))
}

fn criterion_8() -> Outcome {
    let full = network_criterion("network_vdp100.scn", Duration::from_secs(300))?;
    let reduced = network_criterion("network_vdp20.scn", Duration::from_secs(20))?;
    Ok(format!("{full}; {reduced}"))
}

fn criterion_9() -> Outcome {
    let base = system_scenario("system1_plant3_fast.scn");
    let terminal = |dt: f64| -> Result<Vec<f64>, String> {
        let mut sc = base.clone();
        sc.integrator = IntegratorSettings {
            dt,
            horizon: 1.0,
            output_stride: 1000,
        };
        sc.stop.eps = 1e-300;
        let traj = odesim::simulate(&sc).map_err(|e| e.to_string())?;
        Ok(traj.final_state().iter().chain(traj.final_gains()).copied().collect())
    };
    let reference = terminal(5e-4 / 8.0)?;
    let err = |dt: f64| -> Result<f64, String> {
        Ok(terminal(dt)?
            .iter()
            .zip(&reference)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max))
    };
    let errs = [err(2e-3)?, err(1e-3)?, err(5e-4)?];
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    check(
        ratios.iter().all(|r| (12.0..=20.0).contains(r)),
        format!("ratios {ratios:?}, errors {errs:?}"),
    )?;
    Ok(format!("error ratios per halving {:.2}, {:.2}", ratios[0], ratios[1]))
}

fn criterion_10() -> Outcome {
    let mut sc = system_scenario("system1_plant3.scn");
    let delta = 0.5;
    let kbar = odesim::estimate_threshold_gains(&sc.system.a, &sc.system.b, delta, ScalingSide::Row)
        .ok_or("no threshold gains")?;
    let k = 1.05 * kbar.iter().copied().fold(0.0, f64::max);
    sc.gains.k = vec![k; 3];
    sc.system = sc.system.with_frozen_gains(true);
    let traj = odesim::simulate(&sc).map_err(|e| e.to_string())?;
    let rate = odesim::exponential_rate_fit(&traj, 0.0).map_err(|e| e.to_string())?;
    check(rate <= -delta * 0.9, format!("fitted rate {rate}"))?;
    Ok(format!("k = {k:.3} (max threshold {:.3}), fitted rate {rate:.3}", k / 1.05))
}

fn main() {
    let criteria: [fn() -> Outcome; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut failed = 0;
    for (i, f) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(f) {
            Ok(Ok(msg)) => println!("[criterion {}] PASS: {msg}", i + 1),
            Ok(Err(msg)) => {
                failed += 1;
                println!("[criterion {}] FAIL: {msg}", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("[criterion {}] FAIL: panicked", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
