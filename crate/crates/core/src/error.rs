use thiserror::Error;

use crate::algebra::GroundField;

/// Errors raised by the algebra, rectification, averaging and extension kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("ground field mismatch: {left:?} vs {right:?}")]
    FieldMismatch { left: GroundField, right: GroundField },

    #[error("unsupported division ring: {0}")]
    UnsupportedDivisionRing(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("algebra is not semisimple (Gram singular value ratio {ratio:e})")]
    NotSemisimple { ratio: f64 },

    #[error("algebra has no involution")]
    MissingInvolution,

    #[error("involution conjugation flags differ between source and target")]
    InvolutionKindMismatch,

    #[error("invalid group action: {0}")]
    InvalidAction(String),

    #[error("map family has no entry for vertex {0}")]
    MissingVertex(usize),

    #[error("frame is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("invalid base complex: {0}")]
    InvalidBase(String),

    #[error("invalid germ: {0}")]
    InvalidGerm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
