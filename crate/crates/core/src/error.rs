use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid value: {0}")]
    Validation(String),

    #[error("node index {index} out of range for {n} nodes")]
    Index { index: usize, n: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid synthetic spec: {0}")]
    Spec(String),
}
