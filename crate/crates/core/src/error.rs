use thiserror::Error;

use crate::moments::DeltaIndex;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("negative coordinate {value} at position {index}")]
    NegativeCoordinate { index: usize, value: f64 },

    #[error("negative value {value} for {what}")]
    NegativeValue { what: &'static str, value: f64 },

    #[error("exponent {exponent} is not exact at this point; atom roots must clear its denominator")]
    InexactPower { exponent: String },

    #[error("clearing vector component c_{index} = {multiplier} is not a multiple of {required}")]
    Denominator {
        index: usize,
        multiplier: u64,
        required: u64,
    },

    #[error("polynomial p_{index} has a non-real coefficient")]
    NonReal { index: usize },

    #[error("{what} has {size} elements, above the limit of {limit}")]
    ResourceLimit {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("operation requires exact mode")]
    RequiresExact,

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("missing delta entry {0}")]
    MissingEntry(DeltaIndex),

    #[error("missing {} delta entries, first {}", .0.len(), .0[0])]
    MissingEntries(Vec<DeltaIndex>),

    #[error("missing gamma value at alpha = {0}")]
    MissingGamma(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
