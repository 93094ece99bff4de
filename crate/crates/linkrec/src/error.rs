//! Crate-wide error type.
//!
//! Variants are grouped the way callers react to them: I/O problems, input
//! files whose shape is wrong, lookups that name something absent from the
//! graph, and configurations that violate a documented invariant. The CLI
//! maps these groups onto distinct exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Input file does not have the expected shape (header, column set,
    /// cache/graph mismatch). Distinct from per-row rejections, which are
    /// collected and reported without aborting ingestion.
    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("unknown user {0:?}")]
    UnknownUser(String),

    /// Asked for a seller-side quantity of a user who never sold anything.
    #[error("user {0:?} has no sales")]
    NoSales(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
