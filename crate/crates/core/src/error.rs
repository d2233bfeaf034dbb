use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("precondition violated in {function}: {detail}")]
    Precondition {
        function: &'static str,
        detail: String,
    },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("Gram matrix has eigenvalue {value:e} below tolerance -{tol:e}")]
    NegativeEigenvalue { value: f64, tol: f64 },

    #[error("column {column} is numerically dependent (residual norm {norm:e})")]
    RankDeficient { column: usize, norm: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error on {path}: {detail}")]
    Serialize { path: PathBuf, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}

pub(crate) fn precondition(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Precondition {
        function,
        detail: detail.into(),
    }
}
