use std::path::PathBuf;

use thiserror::Error;

use crate::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate node {0:?}")]
    DuplicateNode(String),

    #[error("root {0:?} not found in document file")]
    MissingRoot(String),

    #[error("redirect cycle: {}", .0.join(" -> "))]
    RedirectCycle(Vec<String>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("message addressed to nonexistent vertex {0}")]
    UnknownVertex(NodeId),

    #[error("count for node {node} would become negative")]
    NegativeCount { node: NodeId },

    #[error("worker failure could not be recovered after {attempts} attempts")]
    WorkerFailure { attempts: usize },

    #[error("no grouping of size >= {0} exists in the hierarchy")]
    NoGrouping(usize),

    #[error("unsupported format: {0}")]
    Format(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
