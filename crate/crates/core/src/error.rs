use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An operator was applied outside the class of series it is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of the Gamma function at x = {0}")]
    Pole(f64),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("schema error: {0}")]
    Schema(String),

    /// File output failed; the message names the path.
    #[error("i/o error: {0}")]
    Io(String),

    #[error("iteration {n} failed for unknown #{unknown}: {source}")]
    Iteration {
        n: usize,
        unknown: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {estimate:e} > {tolerance:e}")]
    NoConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        tolerance: f64,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(offset: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: msg.into(),
        }
    }

    /// Usage/validation problems (exit 1 in the CLI) as opposed to runtime failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Validation(_) | Error::Schema(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
