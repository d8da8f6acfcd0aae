use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {index} out of range for graph with {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({u}, {v}) has non-positive or non-finite weight {w}")]
    NonPositiveWeight { u: usize, v: usize, w: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("graph is empty")]
    EmptyGraph,

    #[error("graph is not connected")]
    NotConnected,

    #[error("zero vector")]
    ZeroVector,

    #[error("zero column {0}")]
    ZeroColumn(usize),

    #[error("dense decomposition requested for n = {n} above limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("invalid k = {k} for n = {n}")]
    InvalidK { k: usize, n: usize },

    #[error("embedding dimension k = {k} needs k < n = {n}")]
    KTooLarge { k: usize, n: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residuals {residuals:?})")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("SBM spec has no blocks or an empty block")]
    EmptyBlocks,

    #[error("preset needs an even node count, got {0}")]
    OddN(usize),

    #[error("parse error at {path:?} line {line}: {msg}")]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        msg: String,
    },

    #[error("node {0} has no label")]
    MissingLabels(usize),

    #[error("fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),

    #[error("corruption ratio {0} must lie in [0, 1] with non-negative sigma")]
    InvalidRatio(f64),

    #[error("need at least {min} items, got {got}")]
    TooSmall { min: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value in {0}")]
    NonFiniteValue(&'static str),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    NonFiniteLoss { epoch: usize, loss: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("need at least {min} values, got {got}")]
    TooFewValues { min: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
