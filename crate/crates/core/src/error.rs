use thiserror::Error;

/// Errors raised by construction and geometric operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("node {node}: value {value} is not strictly positive")]
    NonPositive { node: usize, value: f64 },

    #[error("node {node}: value {value} is not finite")]
    NotFinite { node: usize, value: f64 },

    #[error("total mass {actual} differs from {expected} (tolerance {tolerance})")]
    Mass {
        expected: f64,
        actual: f64,
        tolerance: f64,
    },

    #[error("length mismatch: expected {expected} values, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("operands live on different meshes")]
    MeshMismatch,

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-finite intermediate: {0}")]
    NonFinite(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An internal consistency check failed. Signals a bug, not bad input.
    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
