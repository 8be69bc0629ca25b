use thiserror::Error;

/// Errors raised by the library. Every failure surfaced to the CLI goes through here.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subspace is not contained in the ambient space")]
    NotContained,
    #[error("{0} is not an odd prime")]
    InvalidPrime(u64),
    #[error("zero has no inverse")]
    ZeroDivision,
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("precision {precision} is too small for level {level}")]
    InsufficientPrecision { precision: u32, level: u32 },
    #[error("sigma^p is not the identity")]
    OrderViolation,
    #[error("negative degree {0}")]
    NegativeDegree(i64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("convention check failed: {0}")]
    Convention(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("d_r o d_r is nonzero at cell ({0},{1})")]
    DSquared(usize, usize),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("no consistent differential family: {0}")]
    Infeasible(String),
    #[error("E-infinity depends on the sample: {0}")]
    Ambiguous(String),
}

pub type Result<T> = std::result::Result<T, Error>;
