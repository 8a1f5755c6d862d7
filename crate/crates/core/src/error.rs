use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,

    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },

    #[error("need at least {needed} samples with nonzero state after t = {t_start}, found {found}")]
    InsufficientData {
        needed: usize,
        found: usize,
        t_start: f64,
    },

    #[error("no connected graph found after {attempts} attempts (n = {n}, rho = {rho})")]
    GenerationExhausted { attempts: usize, n: usize, rho: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("hypothesis failure: {0}")]
    Hypothesis(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
