//! M-matrix / H-matrix classification, generalized diagonal-dominance scalings
//! and matrix measures.
//!
//! Classification is done with a single linear solve. For a Z-matrix `M`
//! (non-positive off-diagonal), `M` is a nonsingular M-matrix exactly when
//! `M d = 1` has an entrywise positive solution; that same `d` is the diagonal
//! scaling that makes `M` (and hence any matrix with comparison matrix `M`)
//! strictly row-diagonally dominant. The spectral definition is only used in
//! tests as an oracle.

use nalgebra::Schur;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Tolerance for sign and positivity tests.
pub const DEFAULT_TOL: f64 = 1e-9;

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 10_000;

/// Which induced vector norm a measure (or a norm bound) refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    One,
    Inf,
}

impl Norm {
    pub fn vector_norm(self, x: &[f64]) -> f64 {
        match self {
            Norm::One => x.iter().map(|v| v.abs()).sum(),
            Norm::Inf => inf_norm(x),
        }
    }

    pub fn measure(self, a: &SquareMatrix) -> f64 {
        match self {
            Norm::One => measure_one_norm(a),
            Norm::Inf => measure_inf_norm(a),
        }
    }
}

pub(crate) fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `|a_ii|` on the diagonal, `-|a_ij|` off it.
pub fn comparison_matrix(a: &SquareMatrix) -> SquareMatrix {
    let n = a.n();
    let mut m = a.clone();
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)].abs();
            m[(i, j)] = if i == j { v } else { -v };
        }
    }
    m
}

/// Solves `m d = 1` and returns `d` if it exists and every entry exceeds `tol`.
fn positive_solution(m: &SquareMatrix, tol: f64) -> Option<Vec<f64>> {
    let n = m.n();
    let rhs = nalgebra::DVector::from_element(n, 1.0);
    let d = m.to_dmatrix().lu().solve(&rhs)?;
    if d.iter().all(|v| v.is_finite() && *v > tol) {
        Some(d.iter().copied().collect())
    } else {
        None
    }
}

fn has_z_sign_pattern(a: &SquareMatrix, tol: f64) -> bool {
    let n = a.n();
    (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] <= tol))
}

/// Nonsingular M-matrix test: off-diagonal entries non-positive (up to `tol`)
/// and `A d = 1` solvable with `d > tol` entrywise. A 1x1 matrix `[a]` is an
/// M-matrix iff `a > 0`.
pub fn is_m_matrix(a: &SquareMatrix, tol: f64) -> bool {
    assert!(tol > 0.0, "tolerance must be positive");
    if a.n() == 1 {
        return a[(0, 0)] > 0.0;
    }
    has_z_sign_pattern(a, tol) && positive_solution(a, tol).is_some()
}

pub fn is_h_matrix(a: &SquareMatrix, tol: f64) -> bool {
    is_m_matrix(&comparison_matrix(a), tol)
}

fn normalize_max(mut d: Vec<f64>) -> Vec<f64> {
    let max = d.iter().copied().fold(f64::MIN, f64::max);
    for v in &mut d {
        *v /= max;
    }
    d
}

/// Positive `d` with `|a_ii| d_i > sum_{j != i} |a_ij| d_j` for every row, or
/// `None` if `a` is not an H-matrix.
///
/// The vector is `M_A^{-1} 1` rescaled so that its largest entry is 1; before
/// rescaling every row has dominance margin exactly 1, afterwards the margin is
/// `1 / max(M_A^{-1} 1)`.
pub fn find_row_scaling(a: &SquareMatrix, tol: f64) -> Option<Vec<f64>> {
    assert!(tol > 0.0, "tolerance must be positive");
    if a.n() == 1 {
        return (a[(0, 0)] != 0.0).then(|| vec![1.0]);
    }
    positive_solution(&comparison_matrix(a), tol).map(normalize_max)
}

/// Positive `d` with `|a_jj| d_j > sum_{i != j} |a_ij| d_i` for every column.
/// Equal to the row scaling of the transpose.
pub fn find_column_scaling(a: &SquareMatrix, tol: f64) -> Option<Vec<f64>> {
    find_row_scaling(&a.transpose(), tol)
}

fn check_scaling_vector(a: &SquareMatrix, x: &[f64]) -> Result<()> {
    if x.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Validation(
            "scaling vector entries must be strictly positive".into(),
        ));
    }
    Ok(())
}

/// Row margins `|a_ii| x_i - sum_{j != i} |a_ij| x_j`.
pub fn row_dominance_margins(a: &SquareMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check_scaling_vector(a, x)?;
    let n = a.n();
    Ok((0..n)
        .map(|i| {
            let off: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| a[(i, j)].abs() * x[j])
                .sum();
            a[(i, i)].abs() * x[i] - off
        })
        .collect())
}

/// Column margins `|a_jj| x_j - sum_{i != j} |a_ij| x_i`.
pub fn column_dominance_margins(a: &SquareMatrix, x: &[f64]) -> Result<Vec<f64>> {
    row_dominance_margins(&a.transpose(), x)
}

pub fn is_generalized_row_dominant(a: &SquareMatrix, x: &[f64]) -> Result<bool> {
    Ok(row_dominance_margins(a, x)?.iter().all(|m| *m > 0.0))
}

pub fn is_generalized_column_dominant(a: &SquareMatrix, x: &[f64]) -> Result<bool> {
    Ok(column_dominance_margins(a, x)?.iter().all(|m| *m > 0.0))
}

/// Matrix measure induced by the 1-norm: `max_j (a_jj + sum_{i != j} |a_ij|)`.
pub fn measure_one_norm(a: &SquareMatrix) -> f64 {
    let n = a.n();
    (0..n)
        .map(|j| {
            a[(j, j)]
                + (0..n)
                    .filter(|&i| i != j)
                    .map(|i| a[(i, j)].abs())
                    .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Matrix measure induced by the infinity-norm: `max_i (a_ii + sum_{j != i} |a_ij|)`.
pub fn measure_inf_norm(a: &SquareMatrix) -> f64 {
    let n = a.n();
    (0..n)
        .map(|i| {
            a[(i, i)]
                + (0..n)
                    .filter(|&j| j != i)
                    .map(|j| a[(i, j)].abs())
                    .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// All `n` eigenvalues (unordered) via a real Schur decomposition.
pub fn eigenvalues(a: &SquareMatrix) -> Result<Vec<Complex64>> {
    let schur =
        Schur::try_new(a.to_dmatrix(), SCHUR_EPS, SCHUR_MAX_ITER).ok_or(Error::ConvergenceFailure)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect())
}

/// Eigenvalues sorted by real part, then imaginary part.
pub fn sorted_eigenvalues(a: &SquareMatrix) -> Result<Vec<Complex64>> {
    let mut ev = eigenvalues(a)?;
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(ev)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub n: usize,
    pub is_m_matrix: bool,
    pub is_h_matrix: bool,
    pub has_positive_diagonal: bool,
    pub row_scaling: Option<Vec<f64>>,
    pub column_scaling: Option<Vec<f64>>,
    /// `[re, im]` pairs, sorted by real part.
    pub eigenvalues_of_comparison: Vec<[f64; 2]>,
}

impl Classification {
    /// The hypothesis of the high-gain results: H-matrix with positive diagonal.
    pub fn admits_high_gain(&self) -> bool {
        self.is_h_matrix && self.has_positive_diagonal
    }
}

pub fn classify(a: &SquareMatrix, tol: f64) -> Result<Classification> {
    let comparison = comparison_matrix(a);
    let is_h = is_m_matrix(&comparison, tol);
    let (row_scaling, column_scaling) = if is_h {
        (find_row_scaling(a, tol), find_column_scaling(a, tol))
    } else {
        (None, None)
    };
    // The H-test and the scalings run separate solves; near the classification
    // boundary they could disagree, so the H flag follows the scalings.
    let is_h = is_h && row_scaling.is_some() && column_scaling.is_some();
    let row_scaling = row_scaling.filter(|_| is_h);
    let column_scaling = column_scaling.filter(|_| is_h);
    Ok(Classification {
        n: a.n(),
        is_m_matrix: is_h && is_m_matrix(a, tol),
        is_h_matrix: is_h,
        has_positive_diagonal: a.diagonal().iter().all(|d| *d > 0.0),
        row_scaling,
        column_scaling,
        eigenvalues_of_comparison: sorted_eigenvalues(&comparison)?
            .iter()
            .map(|z| [z.re, z.im])
            .collect(),
    })
}
