use thiserror::Error;

use crate::lie::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid structure:\n{0}")]
    InvalidStructure(ValidationReport),

    #[error("vectors are linearly dependent")]
    DependentBasis,

    #[error("momentum does not annihilate the isotropy algebra (|p(z)| = {residual:e})")]
    NotInAnnihilator { residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown model {0:?}")]
    UnknownModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },

    #[error("structure has no matrix representation")]
    MissingRepresentation,

    #[error("structure is not axisymmetric: {0}")]
    NotAxisymmetric(String),

    #[error("not an ideal: {0}")]
    NotAnIdeal(String),

    #[error("existence hypotheses fail: {0}")]
    HypothesesFail(String),

    #[error("no real eigenvector with nonzero eigenvalue found: {0}")]
    NoEigenvector(String),

    #[error("no grading and no declared complement of the distribution")]
    NoComplement,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
