use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown motion template `{0}`")]
    UnknownTemplate(String),

    #[error("channel index {index} out of range ({count} channels)")]
    InvalidChannel { index: usize, count: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("linear algebra failure: {0}")]
    Solver(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed archive: {0}")]
    Format(String),

    #[error("manifest mismatch: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for numerical failures (degenerate data, solver trouble) as
    /// opposed to bad configuration, bad input files or I/O problems.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Degenerate(_) | Error::Solver(_))
    }

    /// Process exit status: 1 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            1
        } else {
            2
        }
    }
}
