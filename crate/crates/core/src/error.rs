use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid module parameters: {0}")]
    InvalidModule(String),
    #[error("element outside the restricted quantum group: {0}")]
    NotInUq(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("loop word parse error: {0}")]
    Parse(String),
    #[error("size guard exceeded: {0}")]
    Guard(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("input rejected: {0}")]
    Rejected(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
