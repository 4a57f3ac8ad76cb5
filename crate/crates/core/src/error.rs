use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not a permutation of 1..{size}: {images:?}")]
    InvalidPermutation { size: usize, images: Vec<usize> },

    #[error("permutation sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("tuple arities differ: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("invalid tuple: {0}")]
    InvalidTuple(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("work estimate {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
