use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite entry at position {0}")]
    NonFinite(usize),

    #[error("index {index} out of range for ambient dimension {ambient}")]
    IndexOutOfRange { index: usize, ambient: usize },

    #[error("matrix has a trivial kernel")]
    TrivialKernel,

    #[error("enumeration refused: {required} subset evaluations exceed the cap of {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("linear system Φx = b is infeasible")]
    Infeasible,

    #[error("internal solver error: {0}")]
    Internal(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
