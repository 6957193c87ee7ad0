use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("dimension mismatch: expected {expected} complex coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An input violates a hypothesis of the inequality being checked. This is
    /// distinct from the inequality failing.
    #[error("hypothesis violated in {check}: {hypothesis}")]
    Hypothesis { check: String, hypothesis: String },

    #[error("integrand value {value:e} exceeds the overflow threshold at a node")]
    IntegrandOverflow { value: f64 },

    #[error("integrand is NaN at a node")]
    IntegrandNaN,

    #[error("walk-on-spheres rejected {rejected} of {walks} walks (step cap {cap})")]
    TooManyRejections { rejected: usize, walks: usize, cap: usize },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidParameter(msg.into())
}

pub(crate) fn unsupported(msg: impl Into<String>) -> LabError {
    LabError::Unsupported(msg.into())
}

pub(crate) fn hypothesis(check: &str, msg: impl Into<String>) -> LabError {
    LabError::Hypothesis {
        check: check.to_string(),
        hypothesis: msg.into(),
    }
}
