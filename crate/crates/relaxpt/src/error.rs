//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PtError {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {dim} below minimum {min}")]
    DimensionTooSmall { dim: usize, min: usize },

    /// The targeted state is not isolated in the unperturbed spectrum;
    /// the reduced resolvent (and with it the whole iteration) is ill-posed.
    #[error(
        "degenerate diagonal at index {index}: |E0 - h0[{index}]| = {gap:e} < {threshold:e}"
    )]
    DegenerateDiagonal {
        index: usize,
        gap: f64,
        threshold: f64,
    },

    #[error("pencil S matrix has zero diagonal entry at index {index}")]
    ZeroSDiagonal { index: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix entry ({row}, {col}) breaks symmetry")]
    NotSymmetric { row: usize, col: usize },

    #[error("dense solve cap exceeded: dimension {dim} > cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("basis size {n} too small for {what} (minimum {min})")]
    BasisTooSmall {
        n: usize,
        what: &'static str,
        min: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PtError>;
