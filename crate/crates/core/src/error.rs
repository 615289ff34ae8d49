use thiserror::Error;

/// Errors raised by the instrument kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("extent error: {0}")]
    Extent(String),
    #[error("step too coarse: {0}")]
    StepTooCoarse(String),
    #[error("histogram spec mismatch: {0}")]
    Spec(String),
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
