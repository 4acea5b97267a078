//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the pipeline library.
#[derive(Error, Debug)]
pub enum Error {
    /// A dataset directory or file could not be ingested.
    #[error("ingestion error: {path}: {message}")]
    Ingestion { path: PathBuf, message: String },

    /// A file did not match its documented format.
    #[error("format error: {0}")]
    Format(String),

    /// An argument violated an operation's domain (empty input, zero norm, shape mismatch).
    #[error("domain error: {0}")]
    Domain(String),

    /// A nearest-neighbor query had no admissible candidate.
    #[error("retrieval error: {0}")]
    Retrieval(String),

    /// A record failed validation.
    #[error("validation error: row {row}: {message}")]
    Validation { row: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn retrieval(msg: impl Into<String>) -> Self {
        Error::Retrieval(msg.into())
    }
}
