use thiserror::Error;

use crate::topology::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("node id {0} is already in use")]
    DuplicateNode(NodeId),

    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(NodeId, NodeId),

    #[error("link {0}-{1} has no cached cost")]
    UncostedLink(NodeId, NodeId),

    #[error("no path exists from {0} to {1}")]
    Unreachable(NodeId, NodeId),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("objective returned {value} at {point:?}")]
    NonFiniteObjective { point: Vec<f64>, value: f64 },

    #[error("aggregate output set is empty everywhere")]
    EmptyAggregate,

    #[error("invalid rule base: {0}")]
    RuleBase(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}
