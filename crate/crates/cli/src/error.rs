use lu_equiv_core::LuError;
use thiserror::Error;

pub const EXIT_PARSE: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;
pub const EXIT_DIMENSION: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Input parsed but is not a valid state or representation.
    #[error("invariant violation: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] LuError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => EXIT_PARSE,
            CliError::Invalid(_) => EXIT_INVARIANT,
            CliError::Core(e) => match e {
                LuError::DimensionMismatch(_)
                | LuError::ModeOutOfRange { .. }
                | LuError::BadDimension(_)
                | LuError::ShapeMismatch(_)
                | LuError::PartyOutOfRange { .. }
                | LuError::WrongArity { .. }
                | LuError::WrongDimension(_) => EXIT_DIMENSION,
                LuError::InvalidState { .. } | LuError::NotUnitary(_) | LuError::NotOrthogonal(_) => EXIT_INVARIANT,
                LuError::MalformedQuiver(_) | LuError::InvalidConfig(_) => EXIT_PARSE,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
