//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Failure inside a simulation run. Runs abort on the first of these; the
/// scenario driver records the abort time and reason in the run metrics
/// instead of bubbling a hard error to the caller.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    /// A state or derivative component stopped being finite.
    #[error("non-finite value in `{component}` at t = {t}")]
    NumericalBlowup { t: f64, component: &'static str },

    /// The adaptation covariance lost positive definiteness, so the update
    /// direction is no longer trustworthy.
    #[error("adaptation covariance lost positive definiteness at t = {t}")]
    CovarianceDegenerate { t: f64 },

    /// A caller handed in something structurally unusable (empty series, ...).
    #[error("{0}")]
    InvalidInput(String),
}

/// Configuration rejected before any simulation work starts.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// TOML syntax error or unknown key (unknown keys are rejected).
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),

    /// A known field with an unusable value, named so the user can fix it.
    #[error("invalid `{field}`: {reason}")]
    Field { field: String, reason: String },
}

impl ConfigError {
    pub fn field(name: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Field {
            field: name.into(),
            reason: reason.into(),
        }
    }
}

/// Failure while writing or reading run artifacts (CSV tables, figures).
#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: malformed table: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("refusing to render figures from an empty log")]
    EmptyLog,
}

impl OutputError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        OutputError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        OutputError::Malformed {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
