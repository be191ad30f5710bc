use std::path::PathBuf;

use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range (graph has {n} vertices)")]
    VertexOutOfRange { vertex: VertexId, n: usize },

    #[error("edge {{{0}, {1}}} already present")]
    DuplicateEdge(VertexId, VertexId),

    #[error("self-loop on vertex {0} is not allowed in an input batch")]
    SelfLoop(VertexId),

    #[error("edge {{{u}, {v}}} has non-positive weight {weight}")]
    NonPositiveWeight {
        u: VertexId,
        v: VertexId,
        weight: f64,
    },

    #[error("ordered pair ({0}, {1}) has no matching reverse pair")]
    AsymmetricBatch(VertexId, VertexId),

    #[error("modularity is undefined on a graph with zero total edge weight")]
    UndefinedModularity,

    #[error("unknown community id {0}")]
    UnknownCommunity(usize),

    #[error("partition covers {partition} vertices but graph has {graph}")]
    PartitionSize { partition: usize, graph: usize },

    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("binning error: {0}")]
    Binning(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
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
