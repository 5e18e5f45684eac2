use thiserror::Error;

use crate::sip::DualVector;

/// Errors raised by the workbench.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("exponent must satisfy 1 < p < inf, got {0}")]
    InvalidExponent(f64),

    #[error("weights must be finite and strictly positive (index {index}: {value})")]
    InvalidWeight { index: usize, value: f64 },

    #[error("space dimension must be at least 1")]
    EmptySpace,

    #[error("family must contain at least one member")]
    EmptyFamily,

    #[error("target lies outside the span of the family (relative residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("iteration did not converge after {iterations} iterations ({detail})")]
    NotConverged { iterations: usize, detail: String },

    #[error("precondition violated: {reason}")]
    Precondition {
        reason: String,
        witness: Option<DualVector>,
    },

    #[error("complex dimension {dim} exceeds the grid oracle limit of {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("unknown sample point index {0}")]
    UnknownPoint(usize),

    #[error("feature map has rank {rank}, expected full column rank {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
