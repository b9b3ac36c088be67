use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("angular component of zero undefined")]
    AngularOfZero,

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for {nvars} variables")]
    VariableIndex { index: usize, nvars: usize },

    #[error("content too small: coefficient valuation {content} < {requested}")]
    ContentTooSmall { content: String, requested: u32 },

    #[error("budget exceeded: {required} evaluation steps required, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },

    #[error("count table is missing level {0}")]
    MissingLevel(u32),

    #[error("count table is missing M_{level}({target})")]
    MissingEntry { level: u32, target: String },

    #[error("malformed Poincaré series: constant term must be 1")]
    MalformedPoincare,

    #[error("series too short: have {have} coefficients, need {need}")]
    SeriesTooShort { have: usize, need: usize },

    #[error("reconstruction failed; increase L or degree bounds")]
    ReconstructionFailed,

    #[error("spurious recurrence: guard coefficients do not match")]
    SpuriousRecurrence,

    #[error("empty pole report")]
    EmptyPoleReport,

    #[error("pole real part {0} is at or below -n")]
    PoleBelowDimension(String),

    #[error("theorem requires n > 1, got n = {0}")]
    DimensionTooSmall(u32),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(String, String),

    #[error("cyclotomic order mismatch: {0} vs {1}")]
    CyclotomicOrderMismatch(u64, u64),

    #[error("conductor is not minimal: character is trivial on 1 + P^(e-1)")]
    NonMinimalConductor,

    #[error("unit group too large: p^e = {0} exceeds the enumeration limit")]
    UnitGroupTooLarge(String),

    #[error("character exponent list has length {got}, unit group has {expected} generators")]
    CharacterExponents { expected: usize, got: usize },

    #[error("estimator undefined: {0}")]
    EstimatorUndefined(&'static str),

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
