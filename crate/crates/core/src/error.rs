use crate::graph::VertexId;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(VertexId),
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error("cluster {0} does not induce a connected subgraph")]
    DisconnectedCluster(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("retry budget exhausted: {0}")]
    RetryExhausted(String),
    #[error("no valid conductance cut")]
    NoValidCut,
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("pipeline failure: {0}")]
    Pipeline(String),
    #[error("undecided: {0}")]
    Undecided(String),
}

pub type Result<T> = std::result::Result<T, Error>;
