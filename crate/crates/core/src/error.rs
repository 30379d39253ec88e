use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported prime {0}; expected one of 2, 3, 5")]
    UnsupportedPrime(u64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("enumeration budget exceeded: {needed} > {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("value table is not a polynomial of degree <= {bound}: {witness}")]
    NotPolynomial { bound: usize, witness: String },
    #[error("form is not in the required class: {0}")]
    NotInClass(String),
    #[error("function is not 1-bounded at index {0}")]
    Unbounded(usize),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("ledger bound failed: {0}")]
    LedgerFailure(String),
    #[error("no candidate found: {0}")]
    NotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
