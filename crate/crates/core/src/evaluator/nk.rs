use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EvalError, FitnessEvaluator};
use crate::space::{Configuration, ConfigurationSpace};

const MAX_K: usize = 20;

/// Synthetic NK landscape over `n` binary options with adjacent epistasis.
///
/// `f(x) = (1/n) * sum_i c_i(x_i, x_{i+1 mod n}, ..., x_{i+k mod n})`, each
/// contribution table drawn uniformly from `[0, 1)` by a generator seeded with
/// `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct NkLandscape {
    n: usize,
    k: usize,
    seed: u64,
    tables: Vec<Vec<f64>>,
}

impl NkLandscape {
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self, EvalError> {
        Self::check_shape(n, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let width = 1usize << (k + 1);
        let tables = (0..n)
            .map(|_| (0..width).map(|_| rng.gen::<f64>()).collect())
            .collect();
        Ok(Self { n, k, seed, tables })
    }

    /// Builds a landscape from explicit contribution tables (`n` tables of
    /// `2^(k+1)` entries each).
    pub fn from_tables(n: usize, k: usize, tables: Vec<Vec<f64>>) -> Result<Self, EvalError> {
        Self::check_shape(n, k)?;
        let width = 1usize << (k + 1);
        if tables.len() != n || tables.iter().any(|t| t.len() != width) {
            return Err(EvalError::Domain(format!(
                "expected {n} contribution tables of {width} entries"
            )));
        }
        if tables.iter().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(EvalError::Domain("contributions must lie in [0, 1]".into()));
        }
        Ok(Self { n, k, seed: 0, tables })
    }

    fn check_shape(n: usize, k: usize) -> Result<(), EvalError> {
        if n == 0 {
            return Err(EvalError::Domain("NK landscape needs n >= 1".into()));
        }
        if k >= n {
            return Err(EvalError::Domain(format!("epistasis k={k} must be below n={n}")));
        }
        if k > MAX_K {
            return Err(EvalError::Domain(format!("epistasis k={k} exceeds {MAX_K}")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The binary space `x0 .. x{n-1}` this landscape is defined on.
    pub fn space(&self) -> ConfigurationSpace {
        ConfigurationSpace::binary(self.n).expect("n >= 1")
    }
}

impl FitnessEvaluator for NkLandscape {
    fn evaluate(&self, x: &Configuration) -> Result<f64, EvalError> {
        let bits = x.values();
        if bits.len() != self.n {
            return Err(EvalError::Domain(format!(
                "configuration has {} options, landscape has n={}",
                bits.len(),
                self.n
            )));
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(EvalError::Domain(format!("option {pos} is not binary")));
        }
        let total: f64 = (0..self.n)
            .map(|i| {
                let index = (0..=self.k).fold(0usize, |acc, j| acc | (bits[(i + j) % self.n] << j));
                self.tables[i][index]
            })
            .sum();
        Ok(total / self.n as f64)
    }
}
