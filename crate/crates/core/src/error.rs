use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A structural precondition on the inputs does not hold.
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("payoffs must be positive (a = {a}, b = {b})")]
    NonPositivePayoff { a: f64, b: f64 },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    /// The integrator produced NaN or infinity, usually from an oversized step.
    #[error("non-finite state at t = {time}")]
    NonFiniteState { time: f64 },

    /// A configuration field is out of range or names something unknown.
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than by the run itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ConstraintViolation(_)
                | Error::NonPositivePayoff { .. }
                | Error::InvalidTopology(_)
                | Error::InvalidConfig { .. }
                | Error::ConfigParse(_)
        )
    }
}
