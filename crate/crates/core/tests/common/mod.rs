#![allow(dead_code)]

use std::path::PathBuf;

use hgain::SquareMatrix;
use rand::Rng;

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn load_matrix(name: &str) -> SquareMatrix {
    SquareMatrix::load(&scenarios_dir().join("matrices").join(name)).unwrap()
}

/// `M D` with `M` strictly diagonally dominant by rows and `D` positive
/// diagonal, so `D` certifies generalized row dominance.
pub fn constructed_h(rng: &mut impl Rng, n: usize) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if i != j {
                m[(i, j)] = rng.random_range(-2.0..2.0);
                off += f64::abs(m[(i, j)]);
            }
        }
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        m[(i, i)] = sign * (off + rng.random_range(0.05..2.0));
    }
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..5.0)).collect();
    m.scale_cols(&d)
}

/// Breaks the H property: makes one 2x2 principal minor of the comparison
/// matrix negative by inflating a symmetric pair of off-diagonal entries.
pub fn perturbed_non_h(rng: &mut impl Rng, n: usize) -> SquareMatrix {
    assert!(n >= 2);
    let mut a = constructed_h(rng, n);
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    let need = (a[(i, i)] * a[(j, j)]).abs().sqrt() * rng.random_range(1.2..3.0);
    let s1 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let s2 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    a[(i, j)] = s1 * need;
    a[(j, i)] = s2 * need;
    a
}

/// Constant matrix with negative diagonal dominating each row: Hurwitz and
/// row dominant.
pub fn hurwitz_row_dominant(rng: &mut impl Rng, n: usize) -> SquareMatrix {
    let mut a = SquareMatrix::zeros(n);
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if i != j {
                a[(i, j)] = rng.random_range(-2.0..2.0);
                off += f64::abs(a[(i, j)]);
            }
        }
        a[(i, i)] = -off - rng.random_range(0.1..2.0);
    }
    a
}

/// Textbook RK4 on a plain closure, used as a reference implementation.
pub fn rk4_reference(f: impl Fn(f64, &[f64]) -> Vec<f64>, t: f64, y: &[f64], h: f64) -> Vec<f64> {
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(a, b)| a + s * b).collect()
    };
    let k1 = f(t, y);
    let k2 = f(t + h / 2.0, &axpy(y, h / 2.0, &k1));
    let k3 = f(t + h / 2.0, &axpy(y, h / 2.0, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}
