//! Distributed adaptive high-gain stabilization.
//!
//! * [`matana`]: M-/H-matrix classification, diagonal scalings, matrix measures.
//! * [`odesim`]: uncertain linear systems under distributed adaptive gains.
//! * [`graphnet`]: graphs, Laplacians, adaptive synchronization of oscillator
//!   networks.
//! * [`scenario`] and [`runner`]: the scenario file format and the run/sweep
//!   drivers behind the `hgain` command-line tool.

pub mod error;
pub mod graphnet;
pub mod matana;
pub mod matrix;
pub mod odesim;
pub mod rk4;
pub mod runner;
pub mod sampling;
pub mod scenario;
pub mod selftest;

pub use error::{Error, Result};
pub use matrix::SquareMatrix;
