//! Error taxonomy shared across the workspace.

use thiserror::Error;

/// Failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed an argument outside an operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The model itself is unusable (empty feasible set, non-PSD covariance, ...).
    #[error("invalid model: {0}")]
    Model(String),
    /// An enumeration or node-count guard would be exceeded.
    #[error("capacity guard exceeded: {0}")]
    Capacity(String),
    /// A structured-text document could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
