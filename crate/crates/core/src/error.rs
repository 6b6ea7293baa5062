use thiserror::Error;

/// Errors raised by constructions in this crate.
///
/// Identity checks never raise on a mismatch; they return a failing
/// [`crate::report::VerificationReport`] instead.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("empty multi-index")]
    EmptyIndex,

    #[error("vanishing denominator: {0}")]
    VanishingDenominator(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown slot ({0}, {1})")]
    UnknownSlot(usize, usize),

    #[error("layout mismatch between operators")]
    LayoutMismatch,

    #[error("operator series did not terminate within degree bound {0}")]
    TruncationFailure(usize),

    #[error("stationary null space has dimension {0}, expected 1")]
    NullSpaceDimension(usize),

    #[error("sector {0} is not basic: every species count must be at least 1")]
    NonBasicSector(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
