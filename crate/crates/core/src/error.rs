use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical routine could not meet its accuracy contract. `estimate`
    /// and `error` are natural logarithms of the best integral estimate and
    /// of its error estimate when the failure comes from quadrature.
    #[error("numerical failure: {message} (log estimate {estimate}, log error {error})")]
    NumericalFailure {
        message: String,
        estimate: f64,
        error: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure {
            message: msg.into(),
            estimate: f64::NAN,
            error: f64::NAN,
        }
    }

    pub fn is_invalid_input(&self) -> bool {
        matches!(self, Error::InvalidInput(_))
    }

    pub fn is_numerical_failure(&self) -> bool {
        matches!(self, Error::NumericalFailure { .. })
    }
}
