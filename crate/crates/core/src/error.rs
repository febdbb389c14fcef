use thiserror::Error;

/// Errors raised by field arithmetic, the leading-term machinery and the
/// elimination engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative value: {0}")]
    NegativeValue(String),
    #[error("order violation: cannot project order {from} to order {to}")]
    OrderViolation { from: u32, to: u32 },
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(u32, u32),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("point is not in the piece")]
    NotInPiece,
    #[error("recursion bound reached in decomposition")]
    RecursionBound,
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("non-effective quantifier: {0}")]
    NonEffectiveQuantifier(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn exhausted(what: impl Into<String>) -> Error {
    Error::PrecisionExhausted(what.into())
}
