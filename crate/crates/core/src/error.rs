use thiserror::Error;

use crate::order::Point;
use crate::violation::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("point {0} lies outside the universe")]
    OutOfBounds(Point),

    #[error("point {0} is not in the domain")]
    NotFound(Point),

    #[error("barrier map has no entry for the pair {{{0}, {1}}}")]
    IncompleteBarrierMap(Point, Point),

    #[error("barrier map has an entry for {{{0}, {1}}} outside the domain")]
    StrayBarrierEntry(Point, Point),

    #[error("invalid pair: {0}")]
    InvalidPair(String),

    #[error("invalid isomorphism: {0}")]
    InvalidIso(String),

    #[error("no order isomorphism: {0}")]
    NoIso(String),

    #[error("domain of {size} points exceeds the topology cap of {cap}; use cb_derive instead")]
    Capacity { size: usize, cap: usize },

    #[error("invalid basic set: {0}")]
    InvalidBasicSet(String),

    #[error("node with code {0} is not in the system")]
    NodeNotFound(u32),

    #[error("invalid amalgamation: {0}")]
    InvalidAmalgamation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid chain: link {0} does not extend its predecessor")]
    InvalidChain(usize),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("schedule infeasible at goal {goal}: {reason}")]
    Infeasible { goal: String, reason: String },

    #[error("amalgamation incompatible at stage {stage}: {violation}")]
    Incompatible {
        stage: &'static str,
        violation: Violation,
    },

    #[error("{0}")]
    Violation(#[from] Violation),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error reports a property violation rather than bad input.
    pub fn is_violation(&self) -> bool {
        matches!(self, Error::Violation(_) | Error::Incompatible { .. })
    }
}
