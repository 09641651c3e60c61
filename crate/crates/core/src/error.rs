use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ring parameters: {0}")]
    Params(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed frame: {0}")]
    Frame(String),
    #[error("unexpected frame: expected {expected}, got {got}")]
    UnexpectedFrame { expected: String, got: String },
    #[error("bad request: {0}")]
    Request(String),
    #[error("session failed: {0}")]
    Session(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
