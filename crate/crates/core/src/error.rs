use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the engine. Query syntax errors have their own
/// [`ParseError`](crate::query::ParseError) type and are wrapped here.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("timestamps not strictly increasing at index {index} (t={t} after t={previous})")]
    NonIncreasingTime { index: usize, previous: i64, t: i64 },

    #[error("unknown {kind} `{id}`")]
    NotFound { kind: &'static str, id: String },

    #[error("duplicate {kind} id `{id}`")]
    Duplicate { kind: &'static str, id: String },

    #[error("cycle detected: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("region `{id}` names unknown parent `{parent}`")]
    UnknownParent { id: String, parent: String },

    #[error("child event `{child}` interval is not contained in parent `{parent}` interval")]
    NotContained { parent: String, child: String },

    #[error("event `{child}` already has parent `{parent}`")]
    AlreadyParented { child: String, parent: String },

    #[error("object mismatch: {0}")]
    ObjectMismatch(String),

    #[error("event `{event}` references unregistered device `{device}`")]
    DanglingDevice { event: String, device: String },

    #[error("missing prerequisite: {0}")]
    MissingPrerequisite(String),

    #[error("unknown presentation kind `{0}`")]
    UnknownPresentation(String),

    #[error(transparent)]
    Parse(#[from] crate::query::ParseError),

    #[error("query error: {0}")]
    Query(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header in {path}: expected `{expected}`, found `{found}`")]
    Header {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error("snapshot version mismatch: file has version {found}, expected {expected}")]
    SnapshotVersion { found: u32, expected: u32 },

    #[error("snapshot checksum failure: {0}")]
    SnapshotChecksum(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn not_found(kind: &'static str, id: impl Into<String>) -> Self {
        Error::NotFound { kind, id: id.into() }
    }
}
