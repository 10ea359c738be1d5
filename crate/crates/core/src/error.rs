use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("insufficient generators/relations: {0}")]
    InsufficientBounds(String),
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
