use thiserror::Error;

use crate::model::{Level, Vertex};

/// Errors produced by diagram construction, queries and constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GbdError {
    #[error("vertex {vertex} is not valid at level {level}")]
    InvalidVertex { level: Level, vertex: Vertex },

    #[error("no such edge: {0}")]
    InvalidEdge(String),

    #[error("level {0} lies beyond the explicit levels of this diagram")]
    LevelOutOfRange(Level),

    #[error("levels out of order: from {from} to {to}")]
    LevelOrder { from: Level, to: Level },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("flag {flag} failed verification: {detail}")]
    FlagRejected { flag: String, detail: String },

    #[error("indexing mismatch: expected {expected}, found {found}")]
    IndexingMismatch { expected: String, found: String },

    #[error("window too small: vertex {vertex} at level {level} falls outside the column window")]
    WindowTooSmall { level: Level, vertex: Vertex },

    #[error("unknown kind: {0}")]
    UnknownKind(String),

    #[error("diagram is not stationary")]
    NotStationary,

    #[error("diagram has no bounded-size flag and no finite-cone evidence")]
    NoBoundedSizeFlag,

    #[error("conflicting forced label: {0}")]
    Conflict(String),

    #[error("generator cannot continue: {0}")]
    Generator(String),
}

pub type Result<T> = std::result::Result<T, GbdError>;
