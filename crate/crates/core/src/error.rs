use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input")]
    EmptyInput,

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: String },

    #[error("line {line}: conflicting duplicate edge {{{u}, {v}}}")]
    ConflictingDuplicate { line: usize, u: String, v: String },

    #[error("line {line}: invalid sign `{token}` (expected +1 or -1)")]
    InvalidSign { line: usize, token: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("{{{u}, {v}}} is not an edge")]
    NotAnEdge { u: NodeId, v: NodeId },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("graph has no edges")]
    NoEdges,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("budget {budget} exceeds edge count {edges}")]
    BudgetExceedsEdges { budget: usize, edges: usize },

    #[error("length mismatch: {predictions} predictions vs {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },

    #[error("cannot evaluate an empty prediction set")]
    EmptyEvaluation,

    #[error("graph with {edges} edges is too small for a {fraction} split")]
    SplitTooSmall { edges: usize, fraction: f64 },

    #[error("node sets differ: {left} vs {right} nodes")]
    NodeSetMismatch { left: usize, right: usize },

    #[error("two-path table is inconsistent with the graph at edge {{{u}, {v}}}")]
    InconsistentTable { u: NodeId, v: NodeId },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
