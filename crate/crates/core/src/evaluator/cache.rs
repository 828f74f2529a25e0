use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use super::{EvalError, FitnessEvaluator};
use crate::space::{Configuration, ConfigurationSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
}

impl CacheStats {
    pub fn lookups(&self) -> u64 {
        self.hits + self.misses
    }
}

/// Memoizes an evaluator by canonical key.
///
/// The first value stored for a key wins. A miss is counted only when a value
/// is actually inserted, so `misses` equals the number of distinct
/// configurations probed even under concurrent lookups.
#[derive(Debug)]
pub struct CachedEvaluator<E> {
    inner: E,
    space: ConfigurationSpace,
    values: Mutex<HashMap<String, f64>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<E: FitnessEvaluator> CachedEvaluator<E> {
    pub fn new(space: ConfigurationSpace, inner: E) -> Self {
        Self {
            inner,
            space,
            values: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::SeqCst),
            misses: self.misses.load(Ordering::SeqCst),
        }
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<String, f64>> {
        self.values.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl<E: FitnessEvaluator> FitnessEvaluator for CachedEvaluator<E> {
    fn evaluate(&self, x: &Configuration) -> Result<f64, EvalError> {
        let key = self.space.canonical_key(x)?;
        if let Some(&v) = self.lock().get(&key) {
            self.hits.fetch_add(1, Ordering::SeqCst);
            return Ok(v);
        }
        // evaluate outside the lock so slow backends do not serialize repeats
        let value = self.inner.evaluate(x)?;
        let mut map = self.lock();
        match map.get(&key) {
            Some(&first) => {
                self.hits.fetch_add(1, Ordering::SeqCst);
                Ok(first)
            }
            None => {
                map.insert(key, value);
                self.misses.fetch_add(1, Ordering::SeqCst);
                Ok(value)
            }
        }
    }
}
