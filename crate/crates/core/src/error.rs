use thiserror::Error;

/// Errors produced by the numeric pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e} below tolerance {tolerance:e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },

    #[error("shifted log-determinant undefined: eigenvalue {eigenvalue:e} + shift {shift:e} is not positive")]
    SingularShift { eigenvalue: f64, shift: f64 },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("requested precision not reached: {0}")]
    Precision(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
