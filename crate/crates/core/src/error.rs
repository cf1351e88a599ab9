use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid query: {0}")]
    Validation(String),

    /// An internal consistency check failed (dimension identity, integrality,
    /// termination measure). Always a bug, never user error.
    #[error("internal assertion failed: {0}")]
    Assertion(String),

    #[error("cache corruption: {0}")]
    CacheCorruption(String),

    #[error("cache mismatch: {0}")]
    CacheMismatch(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
