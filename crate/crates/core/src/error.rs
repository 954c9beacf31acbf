use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IccError {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid shape {rows}x{cols}: {reason}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        reason: &'static str,
    },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("negative entry at ({row}, {col}); a nonnegative matrix is required")]
    NegativeEntry { row: usize, col: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("cannot form {k} clusters from {n} objects")]
    InvalidK { k: usize, n: usize },

    #[error("row {0} is zero")]
    ZeroRow(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{requested} clusters requested but only {found} are non-empty")]
    EmptyClusters { requested: usize, found: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("algorithm {algorithm} cannot use input {input}: {reason}")]
    Unsupported {
        algorithm: String,
        input: String,
        reason: String,
    },

    #[error("no clusterings were produced: {0}")]
    NoClusterings(String),

    #[error("iterative solver did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, IccError>;
