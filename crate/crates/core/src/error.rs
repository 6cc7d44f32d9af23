use thiserror::Error;

use crate::VertexId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("scenario entry {entry}: {msg}")]
    Scenario { entry: usize, msg: String },

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("vertices {from} and {to} are not connected")]
    Disconnected { from: VertexId, to: VertexId },

    #[error("big-M constant overflows the cost range")]
    BigMOverflow,

    #[error("sequencing: {0}")]
    Sequencing(String),

    #[error("external solver: {0}")]
    ExternalSolver(String),

    #[error("temporal plan graph: {0}")]
    Tpg(String),

    #[error("execution: {0}")]
    Execution(String),

    #[error("config: {0}")]
    Config(String),

    #[error("time limit reached")]
    Timeout,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
