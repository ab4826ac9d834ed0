use alloc::string::String;

/// Errors raised by the polyhedral substrate and the analyses built on it.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("duplicate name `{0}` in space")]
    DuplicateName(String),
    #[error("unknown dimension or parameter `{0}`")]
    UnknownDimension(String),
    #[error("missing value for parameter `{0}`")]
    MissingParameter(String),
    #[error("set still has parameters; instantiate it first")]
    Parametric,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("dimension `{0}` has no finite bound")]
    Unbounded(String),
    #[error("enumeration budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("branch-and-bound gave up after {0} nodes; instantiate parameters or bound the set")]
    UnboundedSearch(usize),
    #[error("disjunct count exceeds cap of {0}")]
    ComplexityCap(usize),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid tiling: {0}")]
    InvalidTiling(String),
    #[error("tiling depth mismatch: producer {producer}, consumer {consumer}")]
    DepthMismatch { producer: usize, consumer: usize },
    #[error("depth {depth} out of range 1..={max}")]
    DepthOutOfRange { depth: usize, max: usize },
    #[error("schedule arity mismatch: {0} vs {1}")]
    ScheduleArity(usize, usize),
    #[error("schedule does not have the tiled shape: {0}")]
    BadScheduleShape(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("schedule collision: {0}")]
    ScheduleCollision(String),
    #[error("value read before it is written: {0}")]
    CausalityViolation(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
