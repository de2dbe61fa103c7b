use thiserror::Error;

/// Errors raised by the tensor algebra, state handling and equivalence checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LuError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mode {mode} out of range for a hypermatrix of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("bad local dimension {0}: need d >= 2")]
    BadDimension(usize),

    #[error("invalid state: {what} (residual {residual:e})")]
    InvalidState { what: String, residual: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("party {party} out of range for {parties} parties")]
    PartyOutOfRange { party: usize, parties: usize },

    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not orthogonal: {0}")]
    NotOrthogonal(String),

    #[error("expected a {expected}-partite representation, got {got} parties")]
    WrongArity { expected: usize, got: usize },

    #[error("wrong local dimensions {0:?}: this check requires qubits")]
    WrongDimension(Vec<usize>),

    #[error("malformed quiver: {0}")]
    MalformedQuiver(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type LuResult<T> = Result<T, LuError>;
