//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("architecture mismatch: {0}")]
    ArchitectureMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("replay buffer holds {len} transitions, need at least {need}")]
    BufferTooSmall { len: usize, need: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("free-space sampling exhausted after {0} attempts (walls leave no free space?)")]
    SamplingExhausted(usize),

    #[error("cell ({0}, {1}) is blocked or out of bounds")]
    BlockedCell(i64, i64),

    #[error("grid distances are not supported by the {0} environment")]
    GridUnsupported(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("distance bucket {0} is unsatisfiable on this map")]
    BucketUnsatisfiable(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
