use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid value for `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("matrix is not positive semidefinite (pivot {pivot} at row {row})")]
    NotPositiveSemidefinite { row: usize, pivot: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate statistics: {0}")]
    DegenerateStatistics(String),

    #[error("fixed-point iteration diverged at step {iteration} (value {value})")]
    Divergence { iteration: usize, value: f64 },

    #[error("numeric degeneracy: {0}")]
    NumericDegeneracy(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit codes shared by the CLI and the C ABI.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const DEGENERATE: i32 = 3;
    pub const IO: i32 = 4;
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Config { .. }
            | Error::NotPositiveSemidefinite { .. }
            | Error::GridMismatch(_) => exit_code::VALIDATION,
            Error::DegenerateStatistics(_)
            | Error::Divergence { .. }
            | Error::NumericDegeneracy(_) => exit_code::DEGENERATE,
            Error::Io { .. } => exit_code::IO,
        }
    }
}
