//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by series algebra, contact combinatorics, the Severi
/// recursion, and the convolution engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// `exp` requires every term to carry curve-class degree >= 1.
    #[error("exp requires a positively graded argument: found a degree-0 term {0}")]
    PositiveGradingRequired(String),

    /// `log` requires constant term exactly 1.
    #[error("log requires unit constant term, found {0}")]
    UnitConstantTermRequired(String),

    /// A contact profile (alpha, beta) does not match the stated degree.
    #[error("contact degree mismatch: I(alpha) + I(beta) = {found}, expected {expected}")]
    ContactDegreeMismatch { expected: u64, found: u64 },

    /// A Severi key asks for a negative number of point constraints.
    #[error("negative point count for ({context}): r = {r}")]
    NegativePointCount { context: String, r: i64 },

    /// Tables in a convolution do not share a basis (or generators).
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// A table lacks the contact slot required by its position in a convolution.
    #[error("slot convention mismatch: {0}")]
    SlotConventionMismatch(String),

    /// An entry violates the matching condition deg(s) = A.V.
    #[error("V-degree mismatch: {0}")]
    VDegreeMismatch(String),

    /// The S-matrix remainder has a class-degree-0 term, so its Neumann
    /// series does not terminate under truncation.
    #[error("non-nilpotent S-matrix remainder: {0}")]
    NonNilpotentRemainder(String),

    /// Malformed input data (bad multi-index, singular pairing, schema
    /// violation, unparsable rational, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
