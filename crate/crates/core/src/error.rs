use std::io;

use thiserror::Error;

/// Errors raised anywhere in the operator-learning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("data generation failed: {0}")]
    Generation(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("reference field has zero norm")]
    DegenerateReference,
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(what: impl Into<String>) -> Error {
    Error::Shape(what.into())
}
