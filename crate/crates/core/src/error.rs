use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library. The FFI layer maps each variant onto a
/// stable status code, so new variants must be added there as well.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("variable {} has no value in the assignment", .0 + 1)]
    IncompleteAssignment(usize),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("exhaustive search would visit {0:e} candidate points")]
    TooLarge(f64),

    #[error("bisection bracket does not straddle the threshold: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
