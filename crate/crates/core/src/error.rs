use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("stale update: model is at instant {model}, signal ends at instant {signal}")]
    Stale { model: u64, signal: u64 },

    #[error("lookahead window has length {got}, expected {expected}")]
    Arity { expected: usize, got: usize },

    #[error("instant {instant} lies after the current instant {now}")]
    TemporalOrder { instant: u64, now: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown state {0}")]
    UnknownState(String),

    #[error("need at least {needed} observations, have {have}")]
    InsufficientHistory { needed: usize, have: usize },

    #[error("window [{from}, {to}) is out of range for a signal ending at {n}")]
    WindowOutOfRange { from: u64, to: u64, n: u64 },

    #[error("parameter grid is empty")]
    EmptyGrid,

    #[error("snapshot version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("invalid snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
