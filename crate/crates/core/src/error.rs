use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Input errors (malformed algebras, bad terms, bad parameters) are kept
/// distinct from [`Error::Exhausted`], which only means a configured budget
/// ran out and says nothing about satisfiability.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
    #[error("operation `{op}` has arity {expected} but was given {found} arguments")]
    ArityMismatch {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("valuation has {len} entries but the term uses variable {var}")]
    ValuationTooShort { var: usize, len: usize },
    #[error("element {element} is out of range for an algebra of size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("the algebra is not idempotent")]
    NotIdempotent,
    #[error("tuple is not a member of the closure")]
    NotInClosure,
    #[error("budget exhausted: {0}")]
    Exhausted(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid bracket bijection: {0}")]
    InvalidBracket(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("replay failed at step {step}: {reason}")]
    Replay { step: usize, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
