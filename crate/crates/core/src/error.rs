use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported sphere dimension n = {0} (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("exact integer range exceeded: {0}")]
    Range(String),

    #[error("polar point: direction is undefined when the truncation (x_1..x_n) vanishes")]
    PolarPoint,

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("calibration failed: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
