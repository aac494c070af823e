use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Errors raised by the core optimizer stack.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector or scalar contained NaN or an infinity.
    NonFinite,
    /// Two operands had different dimensions.
    DimensionMismatch { expected: usize, found: usize },
    /// A vector of dimension zero was requested.
    EmptyVector,
    /// An operation that needs at least one element received none.
    EmptyInput,
    /// Learner accumulators became non-finite.
    DivergedState,
    /// A configuration value was outside its admissible range.
    InvalidParameter { name: &'static str, reason: String },
    /// The discount factor produced by a parameter formula left (0, 1).
    BetaOutOfRange,
    /// No problem is registered under this name.
    UnknownProblem(String),
    /// The streamed variance went negative beyond rounding tolerance.
    NegativeVariance(f64),
    /// A conversion step failed; `step` is 1-based.
    AtStep { step: u64, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite => f.write_str("non-finite vector"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::EmptyVector => f.write_str("vectors must have dimension at least 1"),
            Error::EmptyInput => f.write_str("empty input"),
            Error::DivergedState => f.write_str("diverged state"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::BetaOutOfRange => {
                f.write_str("β out of range: epsilon must be smaller than 10·C")
            }
            Error::UnknownProblem(name) => write!(f, "unknown problem {name:?}"),
            Error::NegativeVariance(v) => {
                write!(f, "accumulator corruption: negative variance {v:e}")
            }
            Error::AtStep { step, source } => write!(f, "step {step}: {source}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
