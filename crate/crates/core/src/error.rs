use thiserror::Error;

use crate::netgraph::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node {0} is not in the network")]
    UnknownNode(NodeId),

    #[error("nodes {0} and {1} are adjacent")]
    Adjacent(NodeId, NodeId),

    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(NodeId, NodeId),

    #[error("zero-length link has unbounded capacity")]
    InfiniteCapacity,

    #[error("user-edge threshold is degenerate: 1/(k-1) = {inv_k:.6} < 1/delta = {inv_delta:.6}")]
    DegenerateThreshold { inv_k: f64, inv_delta: f64 },

    #[error("no deeply-embedded user pair among {nodes} nodes (family minimum is {n_min})")]
    NoDeepPair { n_min: usize, nodes: usize },

    #[error("bulk cut infeasible: users {0} and {1} share a neighbour")]
    BulkCutInfeasible(NodeId, NodeId),

    #[error("no critical point: advantage does not change sign on [{lo}, {hi}] km")]
    NoCriticalPoint { lo: f64, hi: f64 },

    #[error("brute-force oracle refuses {0} nodes (limit {1})")]
    OracleTooLarge(usize, usize),

    #[error("edge {0} has no capacity and the source requires explicit values")]
    MissingCapacity(usize),

    #[error("malformed network: {0}")]
    Malformed(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
