use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A malformed record in a line- or row-oriented input. Lines are 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    /// Structurally valid input that violates a domain rule.
    #[error("{0}")]
    Data(String),

    #[error("invalid argument: {0}")]
    InvalidInput(String),

    #[error("embedding ids referenced by posts but missing from the embeddings file: {}", .0.join(", "))]
    MissingEmbeddings(Vec<String>),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("support vector solver did not converge after {iterations} iterations (KKT gap {gap:.3e})")]
    NotConverged {
        iterations: usize,
        gap: f64,
        best: Box<crate::models::svr::SvrModel>,
    },

    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u64),

    #[error("corrupt model payload: {0}")]
    CorruptPayload(String),

    #[error("{}: {inner}", path.display())]
    File { path: PathBuf, inner: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Attaches the offending file path to an error raised while reading it.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            already @ Error::File { .. } => already,
            other => Error::File {
                path: path.into(),
                inner: Box::new(other),
            },
        }
    }
}
