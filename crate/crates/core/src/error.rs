//! Crate-wide error type.
//!
//! Errors are grouped by how a driver should react: bad input specs,
//! resource caps, violated hypotheses, and violated claims. The last group is
//! the most important output of the toolkit: an `AssertionFailed` means a
//! numerically checkable claim did not hold on an exhaustive finite check.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element does not belong to the group: {0}")]
    FamilyMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("ball memory cap exceeded: cap {cap} elements, last complete radius {reached}")]
    MemoryCap { cap: usize, reached: u64 },

    #[error("insufficient scan radius: need r_scan >= r + margin ({r} + {margin}), got {r_scan}")]
    InsufficientScanRadius { r: u64, r_scan: u64, margin: u64 },

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("restriction radius exhausted: have {have}, need {need}")]
    RadiusExhausted { have: u64, need: u64 },

    #[error("orbit verdict is not a finite orbit: {0}")]
    NotFiniteOrbit(String),

    #[error("restriction vanishes on every checked stabilizer element")]
    TrivialRestriction,

    #[error("checked claim violated: {0}")]
    AssertionFailed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code a CLI driver should use for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::FamilyMismatch(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidSpec(_)
            | Error::InsufficientScanRadius { .. }
            | Error::HypothesisViolation(_)
            | Error::RadiusExhausted { .. }
            | Error::NotFiniteOrbit(_)
            | Error::TrivialRestriction => 2,
            Error::MemoryCap { .. } => 3,
            Error::AssertionFailed(_) => 4,
            Error::Io(_) | Error::Json(_) => 2,
        }
    }
}
