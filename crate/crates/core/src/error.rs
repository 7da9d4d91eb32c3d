//! Error taxonomy shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Crate-wide error type.
///
/// `Accuracy` carries the best value reached together with the achieved
/// error estimate, so callers can decide whether a non-converged result is
/// still usable.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid argument to a pointwise operation (NaN/inf input, negative
    /// gap, out-of-range node count, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid configuration (overlapping intervals, |z| > 1,
    /// degenerate interval widths, ...).
    #[error("config error: {0}")]
    Config(String),

    /// An adaptive computation exhausted its budget before reaching the
    /// requested tolerance.
    #[error("accuracy error: {message}; best value {best}, estimated error {estimate:.3e}")]
    Accuracy {
        message: String,
        best: Complex64,
        estimate: f64,
    },

    /// A computation produced values that are inconsistent with the
    /// mathematics (non-finite matrix entries, probabilities below -1e-8,
    /// iteration failing to converge).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A sampling method cannot realistically produce samples for the
    /// requested setup (e.g. rejection sampling with vanishing acceptance).
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    /// Stable machine-readable category, used by the CLI for exit codes.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Accuracy { .. } => "accuracy",
            Error::Numeric(_) => "numeric",
            Error::Infeasible(_) => "infeasible",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
