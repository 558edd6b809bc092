use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("half-space has a zero normal vector")]
    ZeroNormal,

    #[error("pushed-down functional {index} has zero normal (degenerate half-space)")]
    DegenerateHalfSpace { index: usize },

    #[error("half-space must pass through the origin (offset is {0})")]
    NonzeroOffset(String),

    #[error("base points are not in general position: {0}")]
    DegenerateBasePoints(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("budget exceeded: {what} needs {needed} evaluations, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("tolerance search exhausted its budget of {budget} evaluations; tolerance is at least {lower_bound}")]
    ToleranceBudget { budget: u64, lower_bound: i64 },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("parse error: {0}")]
    Parse(String),
}
