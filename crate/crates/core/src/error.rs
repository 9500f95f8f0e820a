//! Error type shared across the crate.

/// Errors produced by loading, validation, and solving.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The input could not be parsed under the declared format.
    #[error("{format} parse error: {message}")]
    Parse {
        format: &'static str,
        message: String,
    },

    /// The input parsed but is missing required structure.
    #[error("schema error: {0}")]
    Schema(String),

    /// A value or argument lies outside its legal domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A brute-force oracle refused an instance beyond its enumeration limit.
    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
