use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("empty mask: {0}")]
    EmptyMask(&'static str),

    #[error("radial oracle failed: {0}")]
    Oracle(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error("{} configuration error(s):\n{}", .0.len(), ConfigErrors(.0))]
    Config(Vec<ConfigError>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// A single problem found while parsing or validating a run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line number, 0 when the problem is not tied to a line.
    pub line: usize,
    pub key: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: `{}`: {}", self.line, self.key, self.reason)
        } else {
            write!(f, "`{}`: {}", self.key, self.reason)
        }
    }
}

struct ConfigErrors<'a>(&'a [ConfigError]);

impl fmt::Display for ConfigErrors<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {e}")?;
        }
        Ok(())
    }
}
