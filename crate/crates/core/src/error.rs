use thiserror::Error;

use crate::hgraph::Colour;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("line {line}: colour index {index} out of range for q = {q}")]
    ColourIndex { line: usize, index: usize, q: usize },

    #[error("graph is not connected (colour {unreachable} unreachable from colour 0)")]
    DisconnectedGraph { unreachable: Colour },

    #[error("unknown built-in graph `{0}`")]
    UnknownBuiltin(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no {len}-edge walk from colour {from} to colour {to}")]
    NoWalk { from: Colour, to: Colour, len: usize },

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("{what}: {needed} exceeds the cap of {cap}")]
    CapExceeded { what: String, needed: u128, cap: u128 },

    #[error("configurations lie in different parity classes")]
    ClassMismatch,

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("path of {n} sites is shorter than the fixed-order half-block length {u}")]
    PathTooShort { n: usize, u: usize },

    #[error("invalid scan order: {0}")]
    InvalidOrder(String),

    #[error("curve never reaches tv <= {eps}")]
    NotReached { eps: f64 },

    #[error("block {lo}..={hi} has disagreements on both boundaries")]
    BothBoundariesDisagree { lo: usize, hi: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
