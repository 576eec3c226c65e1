use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not a DAG: {0}")]
    NotADag(String),

    #[error("graph contains directed edges where an undirected graph is required")]
    NotUndirected,

    #[error("node label sets differ: {0}")]
    LabelMismatch(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("score error: {0}")]
    Score(String),

    #[error("independence test error: {0}")]
    CiTest(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("trajectory error: {0}")]
    Trajectory(String),

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config error at {path}: {msg}")]
    Config { path: String, msg: String },

    #[error("planning error: {0}")]
    Plan(String),

    #[error("learner failed: {0}")]
    Learner(String),

    #[error("wall-clock timeout expired")]
    TimedOut,

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
