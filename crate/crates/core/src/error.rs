use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DktError {
    #[error("manifold mismatch: {0}")]
    ManifoldMismatch(String),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("manifold is not closed: {0}")]
    NotClosed(String),
    #[error("invalid factor selection: {0}")]
    Factors(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("rank mismatch: {0}")]
    Rank(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, DktError>;
