use std::path::PathBuf;

use thiserror::Error;

use crate::block_model::BlockIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {cause}")]
    Io { path: PathBuf, cause: std::io::Error },

    /// A malformed or invariant-violating record in an input file.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("block {index} has domain {domain}, which has no recovery in the economic model")]
    UnknownDomain { index: BlockIndex, domain: u32 },

    /// Node ids forming a cycle, first node repeated at the end.
    #[error("precedence cycle detected: {0:?}")]
    Cycle(Vec<usize>),

    #[error("staging: {0}")]
    Staging(String),

    #[error("network training produced a non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("geometry mismatch: {0}")]
    Geometry(String),

    #[error("{units} units exceed the enumeration limit of {limit}")]
    TooManyUnits { units: usize, limit: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause: source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
