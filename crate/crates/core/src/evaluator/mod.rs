//! Fitness backends. Every backend minimizes: lower fitness is better.

mod cache;
mod external;
mod nk;
mod table;

pub use cache::{CacheStats, CachedEvaluator};
pub use external::{Aggregation, ExternalEvaluator};
pub use nk::NkLandscape;
pub use table::TableEvaluator;

use std::time::Duration;

use thiserror::Error;

use crate::space::{Configuration, SpaceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no measurement recorded for configuration `{key}`")]
    MissingMeasurement { key: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("measurement command failed ({status}): {command}")]
    MeasurementFailure { command: String, status: String },
    #[error("could not parse fitness from output `{output}` of: {command}")]
    Parse { command: String, output: String },
    #[error("measurement timed out after {timeout:?}: {command}")]
    Timeout { command: String, timeout: Duration },
    #[error("fitness {value} for `{key}` is not finite")]
    NonFinite { key: String, value: f64 },
    #[error("table error: {0}")]
    Table(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// The black-box objective `f(x)`.
///
/// Implementations must be callable from several sampling repeats at once and
/// must only ever return finite values.
pub trait FitnessEvaluator: Send + Sync {
    fn evaluate(&self, x: &Configuration) -> Result<f64, EvalError>;
}

impl<T: FitnessEvaluator + ?Sized> FitnessEvaluator for &T {
    fn evaluate(&self, x: &Configuration) -> Result<f64, EvalError> {
        (**self).evaluate(x)
    }
}

impl<T: FitnessEvaluator + ?Sized> FitnessEvaluator for Box<T> {
    fn evaluate(&self, x: &Configuration) -> Result<f64, EvalError> {
        (**self).evaluate(x)
    }
}

impl<T: FitnessEvaluator + ?Sized> FitnessEvaluator for std::sync::Arc<T> {
    fn evaluate(&self, x: &Configuration) -> Result<f64, EvalError> {
        (**self).evaluate(x)
    }
}

/// Adapts a closure into an evaluator. Mostly useful in tests and examples.
pub struct FnEvaluator<F>(pub F);

impl<F> FitnessEvaluator for FnEvaluator<F>
where
    F: Fn(&Configuration) -> f64 + Send + Sync,
{
    fn evaluate(&self, x: &Configuration) -> Result<f64, EvalError> {
        let value = (self.0)(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite {
                key: x.to_string(),
                value,
            })
        }
    }
}
