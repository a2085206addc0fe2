use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument falls outside the domain of the formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested secrecy rate (or frequency design) cannot be achieved.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("did not converge: {0}")]
    Convergence(String),

    /// The random draw landed (numerically) inside a degenerate set; draw again.
    #[error("degenerate random draw, retry with fresh randomness: {0}")]
    RetryRequired(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
