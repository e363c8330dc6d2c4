use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("spatial dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("restriction index set is empty")]
    EmptyIndexSet,

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("invalid scheme: {0}")]
    InvalidSpec(String),

    #[error("scheme has no equilibrium map")]
    MissingEquilibria,

    #[error("equilibrium map does not conform: {0}")]
    NonConformingEquilibria(String),

    #[error("moment {moment} is not conserved (scheme has {conserved} conserved moments)")]
    MomentOutOfRange { moment: usize, conserved: usize },

    #[error("degenerate parameters: {0}")]
    DegenerateParameter(String),

    #[error("insufficient history: need {needed} levels, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("incomparable: {0}")]
    Incomparable(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
