use thiserror::Error;

/// Errors produced by samplers, numerics and verification tests.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("rejection sampler exhausted {attempts} attempts without an accepted sample")]
    RejectionFailure { attempts: u64 },

    #[error("insufficient data: {what} needs at least {required}, got {got}")]
    InsufficientData {
        what: String,
        required: usize,
        got: usize,
    },

    #[error("argument {value} outside supported range {range}")]
    Range { value: f64, range: String },

    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        /// Offending input (e.g. a matrix) serialized for post-mortem inspection.
        dump: Option<String>,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn range(value: f64, range: impl Into<String>) -> Self {
        Error::Range {
            value,
            range: range.into(),
        }
    }

    pub(crate) fn insufficient(what: impl Into<String>, required: usize, got: usize) -> Self {
        Error::InsufficientData {
            what: what.into(),
            required,
            got,
        }
    }
}
