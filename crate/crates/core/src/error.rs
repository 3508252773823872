use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("radix {radix} at position {position} is invalid (must be in 2..={max})")]
    InvalidRadix {
        position: usize,
        radix: usize,
        max: usize,
    },

    #[error("level {level} requires at least {level} radices, got {supplied}")]
    LevelTooLarge { level: usize, supplied: usize },

    #[error("level must be at least 1")]
    ZeroLevel,

    #[error("group order overflows the platform integer range")]
    Overflow,

    #[error("{what} = {value} is out of range (expected {expected})")]
    OutOfRange {
        what: &'static str,
        value: String,
        expected: String,
    },

    #[error("digit {digit} at position {position} exceeds radix {radix}")]
    InvalidDigit {
        position: usize,
        digit: usize,
        radix: usize,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("operands live on different groups")]
    SpecMismatch,

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid atom: {0}")]
    InvalidAtom(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn out_of_range(
    what: &'static str,
    value: impl ToString,
    expected: impl ToString,
) -> Error {
    Error::OutOfRange {
        what,
        value: value.to_string(),
        expected: expected.to_string(),
    }
}
