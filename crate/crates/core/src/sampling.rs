//! Seeded random vectors for initial conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `len` draws uniform on `[-half_width, half_width]`.
pub fn uniform_box(len: usize, half_width: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..len)
        .map(|_| half_width * (2.0 * r.random::<f64>() - 1.0))
        .collect()
}

/// `len` draws uniform on `(lo, hi]`, so `lo = 0` still gives strictly positive
/// values.
pub fn uniform_half_open(len: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..len)
        .map(|_| lo + (hi - lo) * (1.0 - r.random::<f64>()))
        .collect()
}
