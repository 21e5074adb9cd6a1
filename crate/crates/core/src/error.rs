use thiserror::Error;

use crate::basis::{BasisPair, Intensity};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain the formula is defined on.
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A statistics cell the estimator needs has no data.
    #[error("statistics incomplete: no {what} in cell ({intensity}, {pair})")]
    IncompleteStatistics {
        intensity: Intensity,
        pair: BasisPair,
        what: &'static str,
    },

    #[error("no key: {0}")]
    NoKey(&'static str),

    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
