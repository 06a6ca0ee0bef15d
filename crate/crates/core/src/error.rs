use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("vertex {index} out of range for a graph with {count} vertices")]
    VertexOutOfRange { index: usize, count: usize },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertices {0} and {1} have equal balls; no identifying code exists")]
    Twins(usize, usize),

    #[error("rank {rank} out of range for {k}-subsets of a {n}-set")]
    RankOutOfRange { rank: u128, k: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("clause arity {0} has no gadget (supported: 2..=6)")]
    UnsupportedArity(usize),

    #[error("formula is unsatisfiable")]
    Unsatisfiable,

    #[error("model has {vars} variables, exhaustive limit is {limit}")]
    ModelTooLarge { vars: usize, limit: usize },

    #[error("no embedding found after {0} tries")]
    EmbeddingFailed(usize),

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
