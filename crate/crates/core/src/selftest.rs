//! Quick randomized invariant checks, run by `hgain selftest`.
//!
//! These are smaller versions of the property suites in the test targets, meant
//! as a sanity check of an installed binary.

use rand::Rng;

use crate::graphnet::{self, Graph};
use crate::matana::{self, Norm, DEFAULT_TOL};
use crate::matrix::SquareMatrix;
use crate::odesim::{
    self, AdaptiveSystem, GainState, IntegratorSettings, StopSettings, SystemKind, SystemScenario,
};
use crate::sampling;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_matrix(rng: &mut impl Rng, n: usize) -> SquareMatrix {
    let data = (0..n * n).map(|_| rng.random_range(-2.0..2.0)).collect();
    SquareMatrix::new(n, data).expect("finite")
}

fn h_test_agreement(seed: u64) -> CheckResult {
    let mut rng = sampling::rng(seed);
    let mut bad = 0;
    let trials = 100;
    for _ in 0..trials {
        let n = rng.random_range(2..=6);
        let a = random_matrix(&mut rng, n);
        let h = matana::is_h_matrix(&a, DEFAULT_TOL);
        let row = matana::find_row_scaling(&a, DEFAULT_TOL);
        let col = matana::find_column_scaling(&a, DEFAULT_TOL);
        let certified = row
            .as_ref()
            .is_some_and(|d| matana::is_generalized_row_dominant(&a, d).unwrap_or(false))
            && col
                .as_ref()
                .is_some_and(|d| matana::is_generalized_column_dominant(&a, d).unwrap_or(false));
        if h != row.is_some() || h != col.is_some() || h != certified {
            bad += 1;
        }
    }
    CheckResult {
        name: "h-matrix test agrees with scaling existence",
        passed: bad == 0,
        detail: format!("{bad}/{trials} disagreements"),
    }
}

fn measure_bounds_spectrum(seed: u64) -> CheckResult {
    let mut rng = sampling::rng(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let a = random_matrix(&mut rng, n);
        let mu = matana::measure_inf_norm(&a);
        if let Ok(ev) = matana::eigenvalues(&a) {
            for z in ev {
                worst = worst.max(z.re - mu);
            }
        }
    }
    CheckResult {
        name: "Re(lambda) <= mu_inf",
        passed: worst <= 1e-9,
        detail: format!("max Re(lambda) - mu = {worst:.3e}"),
    }
}

fn coppel_random_systems(seed: u64) -> CheckResult {
    let mut rng = sampling::rng(seed);
    let mut failures = 0;
    let trials = 20;
    for i in 0..trials {
        let n = rng.random_range(2..=5);
        let mut a = random_matrix(&mut rng, n);
        for r in 0..n {
            let off: f64 = (0..n).filter(|&c| c != r).map(|c| a[(r, c)].abs()).sum();
            a[(r, r)] = -off - rng.random_range(0.1..1.0);
        }
        let sc = SystemScenario {
            system: AdaptiveSystem::new(SystemKind::SystemI, a.clone(), SquareMatrix::zeros(n))
                .expect("square")
                .with_frozen_gains(true),
            x0: sampling::uniform_box(n, 5.0, seed + i),
            gains: GainState::new(vec![1.0; n], vec![1.0; n], vec![1.0; n]).expect("valid"),
            integrator: IntegratorSettings {
                dt: 1e-3,
                horizon: 2.0,
                output_stride: 1,
            },
            stop: StopSettings {
                eps: 1e-300,
                ..StopSettings::default()
            },
        };
        let ok = odesim::simulate(&sc)
            .and_then(|traj| odesim::verify_coppel(&traj, |_| a.clone(), Norm::Inf, 0.01))
            .unwrap_or(false);
        if !ok {
            failures += 1;
        }
    }
    CheckResult {
        name: "Coppel bounds on random row-dominant systems",
        passed: failures == 0,
        detail: format!("{failures}/{trials} violations"),
    }
}

fn edge_laplacian_lemma(seed: u64) -> CheckResult {
    let mut rng = sampling::rng(seed);
    let mut bad = 0;
    let trials = 10;
    for i in 0..trials {
        let n = rng.random_range(3..=10);
        let Ok((g, _)) = graphnet::erdos_renyi(n, 0.5, seed + i) else {
            bad += 1;
            continue;
        };
        let k_hat: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        let k: Vec<f64> = k_hat.iter().map(|v| v + rng.random_range(0.1..1.0)).collect();
        let spectrum = |w: &[f64]| -> Vec<f64> {
            let mut ev: Vec<f64> = graphnet::edge_laplacian(&g, w)
                .expect("valid weights")
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .collect();
            ev.sort_by(f64::total_cmp);
            ev
        };
        let (big, small) = (spectrum(&k), spectrum(&k_hat));
        let kappa = g.m_edges() + 1 - n;
        let zeros = |ev: &[f64]| ev.iter().filter(|v| v.abs() < 1e-9).count();
        let monotone = big[kappa..].iter().zip(&small[kappa..]).all(|(a, b)| a > b);
        if zeros(&big) != kappa || zeros(&small) != kappa || !monotone {
            bad += 1;
        }
    }
    CheckResult {
        name: "edge Laplacian zero count and eigenvalue monotonicity",
        passed: bad == 0,
        detail: format!("{bad}/{trials} failures"),
    }
}

fn laplacian_factorization(seed: u64) -> CheckResult {
    let mut ok = true;
    for i in 0..10 {
        let (g, _): (Graph, u64) = match graphnet::erdos_renyi(12, 0.4, seed + i) {
            Ok(v) => v,
            Err(_) => {
                ok = false;
                continue;
            }
        };
        let h = graphnet::incidence_matrix(&g);
        let hth = h.transpose() * &h;
        ok &= graphnet::laplacian(&g).to_dmatrix() == hth;
    }
    CheckResult {
        name: "L = H^T H",
        passed: ok,
        detail: String::new(),
    }
}

fn adaptive_gain_monotone() -> CheckResult {
    let a = SquareMatrix::from_rows(&[[1.0, 4.0, 2.0], [5.0, -2.0, 1.0], [6.0, 3.0, -4.0]])
        .expect("static");
    let b = SquareMatrix::from_rows(&[[7.0, 4.0, -2.0], [-4.0, 6.0, 3.0], [2.0, -2.0, 5.0]])
        .expect("static");
    let sc = SystemScenario {
        system: AdaptiveSystem::new(SystemKind::SystemI, a, b).expect("square"),
        x0: vec![5.0, -10.0, 20.0],
        gains: GainState::new(vec![4.0, 3.0, 2.0], vec![1.0; 3], vec![1.0, 1.5, 2.0])
            .expect("valid"),
        integrator: IntegratorSettings::default(),
        stop: StopSettings::default(),
    };
    match odesim::simulate(&sc) {
        Ok(traj) => {
            let monotone = traj
                .gains
                .windows(2)
                .all(|w| w[1].iter().zip(&w[0]).all(|(a, b)| a >= b));
            let converged = traj.termination == odesim::Termination::Converged;
            CheckResult {
                name: "adaptive gains monotone and state converges",
                passed: monotone && converged,
                detail: format!("final gains {:?}", traj.final_gains()),
            }
        }
        Err(e) => CheckResult {
            name: "adaptive gains monotone and state converges",
            passed: false,
            detail: e.to_string(),
        },
    }
}

pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        h_test_agreement(seed),
        measure_bounds_spectrum(seed + 1),
        coppel_random_systems(seed + 2),
        edge_laplacian_lemma(seed + 3),
        laplacian_factorization(seed + 4),
        adaptive_gain_monotone(),
    ]
}
