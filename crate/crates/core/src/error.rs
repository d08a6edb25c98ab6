use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("numerical failure: {message} (t = {time}, substeps = {substeps}, last error estimate = {error_estimate:e})")]
    NumericalFailure {
        message: String,
        time: f64,
        substeps: usize,
        error_estimate: f64,
    },

    #[error("dimension {dim} exceeds dense threshold {threshold}; evolve states in the Schrödinger picture instead")]
    DimensionTooLarge { dim: usize, threshold: usize },

    #[error("insufficient data: {usable} usable points, need at least {required}")]
    InsufficientData { usable: usize, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
