use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A received sequence cannot be inverted by a matcher.
    #[error("decode error{}: {message}", level.map(|j| format!(" at bit level {j}")).unwrap_or_default())]
    Decode {
        level: Option<usize>,
        message: String,
    },

    /// Inconsistent system parameters (code rate, frame sizes, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An optimizer or fixed-point iteration did not converge.
    #[error("planning error: {message}")]
    Planning {
        message: String,
        last_iterate: Option<Vec<f64>>,
    },

    /// Malformed input file (alist, config documents, payloads).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn decode(level: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Decode {
            level,
            message: msg.into(),
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
