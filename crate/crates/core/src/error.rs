use std::fmt::Display;

use thiserror::Error;

/// A malformed or unreadable artifact file.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message}")]
pub struct FormatError {
    message: String,
}

impl FormatError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }

    pub fn at_line(line: usize, err: impl Display) -> Self {
        Self::new(format!("line {line}: {err}"))
    }

    pub fn io(what: &str, err: impl Display) -> Self {
        Self::new(format!("reading {what}: {err}"))
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}
