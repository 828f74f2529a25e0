//! Deciding how many sampling repeats give a structurally stable network.
//!
//! Groups of `resamples` random subsets of size `step * i` are drawn from a pool
//! of run traces, each subset is synthesized into one network, and the AC and
//! ACC distributions of consecutive groups are compared with rank-sum tests.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lon::{Lon, LonError};
use crate::metrics::{assortativity, average_clustering, wilcoxon_rank_sum, MetricError};
use crate::sampler::RunTrace;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("invalid stability parameters: {0}")]
    InvalidConfig(String),
    #[error("pool holds {got} traces, need at least {needed}")]
    PoolTooSmall { needed: usize, got: usize },
    #[error("trace {index} cannot be turned into a network: {source}")]
    Trace { index: usize, source: LonError },
    #[error(transparent)]
    Lon(#[from] LonError),
    #[error("only {valid} subsets of size {size} have a defined assortativity")]
    InsufficientData { size: usize, valid: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityConfig {
    pub step: usize,
    pub resamples: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Worker threads for subset synthesis; 0 picks the rayon default.
    pub parallelism: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            step: 10,
            resamples: 20,
            alpha: 0.05,
            seed: 0,
            parallelism: 0,
        }
    }
}

impl StabilityConfig {
    pub fn validate(&self, pool_size: usize) -> Result<(), StabilityError> {
        let fail = |m: &str| Err(StabilityError::InvalidConfig(m.to_string()));
        if self.step < 1 {
            return fail("step must be at least 1");
        }
        if self.resamples < 2 {
            return fail("resamples must be at least 2");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail("alpha must lie strictly between 0 and 1");
        }
        let needed = self.step.saturating_mul(3);
        if pool_size < needed {
            return Err(StabilityError::PoolTooSmall { needed, got: pool_size });
        }
        Ok(())
    }
}

/// p-values of the four comparisons made at one subset size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepTests {
    /// AC, group i-2 against group i-1.
    pub ac_prev: f64,
    /// AC, group i-1 against group i.
    pub ac_curr: f64,
    pub acc_prev: f64,
    pub acc_curr: f64,
}

impl StepTests {
    fn all_at_least(&self, alpha: f64) -> bool {
        [self.ac_prev, self.ac_curr, self.acc_prev, self.acc_curr]
            .iter()
            .all(|&p| p >= alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityStep {
    pub i: usize,
    pub subset_size: usize,
    /// One entry per subset; `None` where assortativity is undefined.
    pub ac: Vec<Option<f64>>,
    pub acc: Vec<f64>,
    /// Present from the third group on.
    pub tests: Option<StepTests>,
}

impl StabilityStep {
    fn valid_ac(&self) -> Vec<f64> {
        self.ac.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityResult {
    pub stable_lon: Lon,
    pub n_stable: usize,
    pub trajectory: Vec<StabilityStep>,
    /// Group index at which stability was declared; `None` when the pool ran
    /// out first.
    pub decision_i: Option<usize>,
    /// Index of the chosen subset within its group.
    pub chosen_sample: usize,
}

impl StabilityResult {
    pub fn converged(&self) -> bool {
        self.decision_i.is_some()
    }
}

/// Runs the stability procedure over `pool`.
///
/// Stability is declared at the first group `i >= 3` where none of the four
/// rank-sum tests finds a difference at level `alpha`; one network of group
/// `i - 1`, picked at random, is returned. If `step * i` exceeds the pool before
/// that, a network of the last complete group is returned unconverged.
pub fn detect_stable(pool: &[RunTrace], config: &StabilityConfig) -> Result<StabilityResult, StabilityError> {
    config.validate(pool.len())?;
    let lons: Vec<Lon> = pool
        .iter()
        .enumerate()
        .map(|(index, t)| Lon::from_trace(t).map_err(|source| StabilityError::Trace { index, source }))
        .collect::<Result<_, _>>()?;
    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| StabilityError::InvalidConfig(format!("thread pool: {e}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trajectory: Vec<StabilityStep> = Vec::new();
    let mut groups: Vec<Vec<Lon>> = Vec::new();
    let mut i = 1;
    loop {
        let size = config.step * i;
        if size > lons.len() {
            break;
        }
        let subsets: Vec<Vec<usize>> = (0..config.resamples)
            .map(|_| {
                let mut idx = sample(&mut rng, lons.len(), size).into_vec();
                idx.sort_unstable();
                idx
            })
            .collect();
        let networks: Vec<Lon> = threads.install(|| {
            subsets
                .par_iter()
                .map(|idx| Lon::synthesize(idx.iter().map(|&j| &lons[j])))
                .collect::<Result<_, _>>()
        })?;
        let (ac, acc): (Vec<Option<f64>>, Vec<f64>) = threads.install(|| {
            networks
                .par_iter()
                .map(|g| (assortativity(g).ok(), average_clustering(g)))
                .unzip()
        });
        let mut step = StabilityStep {
            i,
            subset_size: size,
            ac,
            acc,
            tests: None,
        };
        let valid = step.valid_ac().len();
        if valid < 2 {
            return Err(StabilityError::InsufficientData { size, valid });
        }
        if i >= 3 {
            let (a, b) = (&trajectory[i - 3], &trajectory[i - 2]);
            step.tests = Some(StepTests {
                ac_prev: wilcoxon_rank_sum(&a.valid_ac(), &b.valid_ac())?.p_value,
                ac_curr: wilcoxon_rank_sum(&b.valid_ac(), &step.valid_ac())?.p_value,
                acc_prev: wilcoxon_rank_sum(&a.acc, &b.acc)?.p_value,
                acc_curr: wilcoxon_rank_sum(&b.acc, &step.acc)?.p_value,
            });
        }
        let stable = step.tests.is_some_and(|t| t.all_at_least(config.alpha));
        trajectory.push(step);
        groups.push(networks);
        // only the previous group can still be returned
        if groups.len() > 2 {
            groups.remove(0);
        }
        if stable {
            let chosen = rng.gen_range(0..config.resamples);
            let stable_lon = groups.swap_remove(0).swap_remove(chosen);
            return Ok(StabilityResult {
                stable_lon,
                n_stable: config.step * (i - 1),
                trajectory,
                decision_i: Some(i),
                chosen_sample: chosen,
            });
        }
        i += 1;
    }

    let last = trajectory.last().expect("validated pool holds at least one group");
    let (size, last_i) = (last.subset_size, last.i);
    let chosen = rng.gen_range(0..config.resamples);
    let stable_lon = groups.pop().expect("one group per trajectory step").swap_remove(chosen);
    debug_assert_eq!(last_i, trajectory.len());
    Ok(StabilityResult {
        stable_lon,
        n_stable: size,
        trajectory,
        decision_i: None,
        chosen_sample: chosen,
    })
}

/// Interquartile range with linear interpolation between order statistics.
pub fn interquartile_range(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    Some(q(0.75) - q(0.25))
}

/// Trajectory table with header `i,sample_index,ac,acc`; undefined AC is empty.
pub fn write_trajectory_csv<W: std::io::Write>(
    result: &StabilityResult,
    comment: Option<&str>,
    out: W,
) -> Result<(), csv::Error> {
    let mut out = out;
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "sample_index", "ac", "acc"])?;
    for step in &result.trajectory {
        for (j, (ac, acc)) in step.ac.iter().zip(&step.acc).enumerate() {
            let ac = ac.map(|a| a.to_string()).unwrap_or_default();
            w.write_record([step.i.to_string(), j.to_string(), ac, acc.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    converged: bool,
    decision_i: Option<usize>,
    n_stable: usize,
    chosen_sample: usize,
    config: &'a StabilityConfig,
    tests: Vec<(usize, StepTests)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    producer: Option<&'a serde_json::Value>,
}

/// Decision summary as pretty JSON with a trailing newline.
pub fn summary_json(result: &StabilityResult, config: &StabilityConfig, producer: Option<&serde_json::Value>) -> String {
    let summary = Summary {
        converged: result.converged(),
        decision_i: result.decision_i,
        n_stable: result.n_stable,
        chosen_sample: result.chosen_sample,
        config,
        tests: result
            .trajectory
            .iter()
            .filter_map(|s| s.tests.map(|t| (s.i, t)))
            .collect(),
        producer,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("serializable");
    text.push('\n');
    text
}
