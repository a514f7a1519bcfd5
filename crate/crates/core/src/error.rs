use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum FracError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field is not compactly supported inside the grid box (nonzero value at boundary node {node})")]
    SupportViolation { node: usize },

    #[error("field contains a non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("spectral backend requires an even number of points per axis, got {0}")]
    OddGrid(usize),

    #[error("unsupported dimension {0} for this operation")]
    UnsupportedDimension(usize),

    #[error("invalid minor specification: {0}")]
    InvalidMinor(String),

    #[error("non-finite energy density at node {node} (x = {coords:?})")]
    NonFiniteEnergy { node: usize, coords: Vec<f64> },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FracError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> FracError {
    FracError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
