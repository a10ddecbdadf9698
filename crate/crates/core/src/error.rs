use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty polynomial input")]
    EmptyInput,
    #[error("invalid character {found:?} at position {position}")]
    InvalidCharacter { found: char, position: usize },
    #[error("invalid exponent {0:?}")]
    InvalidExponent(String),
    #[error("duplicate exponent {0}")]
    DuplicateExponent(usize),
    #[error("leading coefficient is zero (bitstring must end in 1)")]
    LeadingZero,
    #[error("degree {degree} exceeds the cap {cap} of {what}")]
    DegreeAboveCap {
        what: &'static str,
        degree: usize,
        cap: usize,
    },
    #[error("index k = {k} out of range 0..={max}")]
    IndexOutOfRange { k: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mask length {mask} does not match polynomial length {poly}")]
    LengthMismatch { mask: usize, poly: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
