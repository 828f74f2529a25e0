//! Iterated local search sampling of local optima.
//!
//! [`sample_run`] performs one repeat: an initial random perturbation phase,
//! a first-improvement descent to the first local optimum, then repeated
//! kick-and-descend iterations that record every local optimum reached and a
//! directed edge from the iteration's starting optimum to it.

mod trace;

pub use trace::{read_trace, write_trace, RunTrace, Termination, TraceEdge, TraceVertex};

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{EvalError, FitnessEvaluator};
use crate::space::{Configuration, ConfigurationSpace};
use trace::TraceBuilder;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    /// Random samples drawn in the initial perturbation phase.
    pub tau: usize,
    /// Random one-option steps per kick.
    pub kappa: usize,
    /// Probability of replacing the current point by a fresh random sample.
    pub restart_prob: f64,
    /// Stop once this many distinct local optima are recorded.
    pub target_optima: usize,
    /// Maximum number of distinct configurations evaluated per run.
    pub eval_budget: u64,
    /// Maximum consecutive iterations without a new local optimum.
    pub stall_limit: usize,
    pub seed: u64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            tau: 10,
            kappa: 3,
            restart_prob: 0.05,
            target_optima: 100,
            eval_budget: 1_000_000,
            stall_limit: 1_000,
            seed: 0,
        }
    }
}

impl SamplerParams {
    pub fn validate(&self) -> Result<(), SampleError> {
        let fail = |m: &str| Err(SampleError::InvalidParams(m.to_string()));
        if self.tau < 2 {
            return fail("tau must be at least 2");
        }
        if self.kappa < 1 {
            return fail("kappa must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.restart_prob) {
            return fail("restart probability must lie in [0, 1]");
        }
        if self.target_optima < 1 {
            return fail("target optima must be at least 1");
        }
        if self.eval_budget < self.target_optima as u64 {
            return fail("evaluation budget must be at least the target optima count");
        }
        if self.stall_limit < 1 {
            return fail("stall limit must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("invalid sampler parameters: {0}")]
    InvalidParams(String),
    #[error("evaluation failed after {} local optima: {source}", partial.distinct_optima())]
    Evaluation {
        source: EvalError,
        partial: Box<RunTrace>,
    },
    #[error("all {0} sampling repeats failed")]
    AllFailed(usize, Vec<SampleError>),
}

/// Failure of a single descent.
#[derive(Debug, Error, PartialEq)]
pub enum DescentError {
    #[error(transparent)]
    Evaluation(#[from] EvalError),
    #[error("evaluation budget exhausted; best configuration so far {best}")]
    BudgetExhausted { best: Configuration },
}

enum ProbeError {
    Budget,
    Eval(EvalError),
}

/// Per-run memo of evaluated configurations with a unique-evaluation budget.
pub struct Probe<'a, E: ?Sized> {
    evaluator: &'a E,
    memo: HashMap<Configuration, f64>,
    budget: u64,
}

impl<'a, E: FitnessEvaluator + ?Sized> Probe<'a, E> {
    pub fn new(evaluator: &'a E, budget: u64) -> Self {
        Self {
            evaluator,
            memo: HashMap::new(),
            budget,
        }
    }

    pub fn unlimited(evaluator: &'a E) -> Self {
        Self::new(evaluator, u64::MAX)
    }

    /// Distinct configurations evaluated so far.
    pub fn evaluations(&self) -> u64 {
        self.memo.len() as u64
    }

    fn fitness(&mut self, x: &Configuration) -> Result<f64, ProbeError> {
        if let Some(&f) = self.memo.get(x) {
            return Ok(f);
        }
        if self.memo.len() as u64 >= self.budget {
            return Err(ProbeError::Budget);
        }
        let f = self.evaluator.evaluate(x).map_err(ProbeError::Eval)?;
        self.memo.insert(x.clone(), f);
        Ok(f)
    }
}

/// First-improvement descent with neutral moves.
///
/// Each pass visits the neighbors of the current point in a freshly shuffled
/// order and moves to the first one whose fitness is not worse. A neutral or
/// improving move is only taken to a configuration not yet visited in this
/// descent, so plateaus cannot cycle. The result satisfies
/// `f(result) <= f(u)` for every neighbor `u`.
pub fn iterative_first_improvement<E, R>(
    space: &ConfigurationSpace,
    probe: &mut Probe<'_, E>,
    start: &Configuration,
    rng: &mut R,
) -> Result<Configuration, DescentError>
where
    E: FitnessEvaluator + ?Sized,
    R: Rng + ?Sized,
{
    space.validate(start).map_err(EvalError::from)?;
    let budget_err = |best: &Configuration| DescentError::BudgetExhausted { best: best.clone() };
    let mut current = start.clone();
    let mut current_f = match probe.fitness(&current) {
        Ok(f) => f,
        Err(ProbeError::Budget) => return Err(budget_err(&current)),
        Err(ProbeError::Eval(e)) => return Err(e.into()),
    };
    let mut visited = HashSet::from([current.clone()]);
    loop {
        let mut neighbors = space.neighborhood(&current).map_err(EvalError::from)?;
        neighbors.shuffle(rng);
        let mut moved = false;
        for candidate in neighbors {
            if visited.contains(&candidate) {
                // every visited point has fitness >= current_f
                continue;
            }
            let f = match probe.fitness(&candidate) {
                Ok(f) => f,
                Err(ProbeError::Budget) => return Err(budget_err(&current)),
                Err(ProbeError::Eval(e)) => return Err(e.into()),
            };
            if f <= current_f {
                visited.insert(candidate.clone());
                current = candidate;
                current_f = f;
                moved = true;
                break;
            }
        }
        if !moved {
            return Ok(current);
        }
    }
}

/// One sampling repeat seeded with `params.seed`.
pub fn sample_run<E>(
    space: &ConfigurationSpace,
    evaluator: &E,
    params: &SamplerParams,
) -> Result<RunTrace, SampleError>
where
    E: FitnessEvaluator + ?Sized,
{
    sample_run_from(space, evaluator, params, None)
}

/// Like [`sample_run`], starting the initial perturbation phase from `initial`
/// instead of a random configuration.
pub fn sample_run_from<E>(
    space: &ConfigurationSpace,
    evaluator: &E,
    params: &SamplerParams,
    initial: Option<&Configuration>,
) -> Result<RunTrace, SampleError>
where
    E: FitnessEvaluator + ?Sized,
{
    params.validate()?;
    if let Some(x) = initial {
        space
            .validate(x)
            .map_err(|e| SampleError::InvalidParams(format!("initial configuration: {e}")))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut probe = Probe::new(evaluator, params.eval_budget);
    let mut trace = TraceBuilder::default();

    let outcome = run_ils(space, &mut probe, params, initial, &mut rng, &mut trace);
    let evaluations = probe.evaluations();
    let finish = |trace: TraceBuilder, termination| {
        trace.finish(
            params.seed,
            params.clone(),
            evaluations,
            termination,
            Some(space.fingerprint()),
        )
    };
    match outcome {
        Ok(termination) => Ok(finish(trace, termination)),
        Err(source) => Err(SampleError::Evaluation {
            source,
            partial: Box::new(finish(trace, Termination::BudgetExhausted)),
        }),
    }
}

enum Step<T> {
    Value(T),
    Stop(Termination),
}

fn run_ils<E, R>(
    space: &ConfigurationSpace,
    probe: &mut Probe<'_, E>,
    params: &SamplerParams,
    initial: Option<&Configuration>,
    rng: &mut R,
    trace: &mut TraceBuilder,
) -> Result<Termination, EvalError>
where
    E: FitnessEvaluator + ?Sized,
    R: Rng + ?Sized,
{
    macro_rules! attempt {
        ($e:expr) => {
            match $e? {
                Step::Value(v) => v,
                Step::Stop(t) => return Ok(t),
            }
        };
    }
    let fitness = |probe: &mut Probe<'_, E>, x: &Configuration| match probe.fitness(x) {
        Ok(f) => Ok(Step::Value(f)),
        Err(ProbeError::Budget) => Ok(Step::Stop(Termination::BudgetExhausted)),
        Err(ProbeError::Eval(e)) => Err(e),
    };
    let descend = |probe: &mut Probe<'_, E>, x: &Configuration, rng: &mut R| {
        match iterative_first_improvement(space, probe, x, rng) {
            Ok(c) => Ok(Step::Value(c)),
            Err(DescentError::BudgetExhausted { .. }) => Ok(Step::Stop(Termination::BudgetExhausted)),
            Err(DescentError::Evaluation(e)) => Err(e),
        }
    };

    // initial perturbation
    let mut init = match initial {
        Some(x) => x.clone(),
        None => space.random_sample(rng),
    };
    let mut init_f = attempt!(fitness(probe, &init));
    for _ in 0..params.tau {
        let candidate = space.random_sample(rng);
        let f = attempt!(fitness(probe, &candidate));
        if f <= init_f {
            init = candidate;
            init_f = f;
        }
    }
    let mut current = attempt!(descend(probe, &init, rng));
    let current_f0 = attempt!(fitness(probe, &current));
    trace.add_vertex(space.key_unchecked(&current), current_f0);
    if space.neighborhood_size() == 0 {
        return Ok(Termination::NoNeighbors);
    }

    // intensification
    let mut stalled = 0usize;
    while trace.distinct() < params.target_optima {
        let start = current.clone();
        let mut kicked = start.clone();
        for _ in 0..params.kappa {
            kicked = space.random_neighbor(&kicked, rng).expect("non-empty neighborhood");
        }
        let found = attempt!(descend(probe, &kicked, rng));
        let found_f = attempt!(fitness(probe, &found));
        let current_f = attempt!(fitness(probe, &current));
        if found_f <= current_f {
            current = found.clone();
        }
        if rng.gen::<f64>() < params.restart_prob {
            current = space.random_sample(rng);
        }

        let start_key = space.key_unchecked(&start);
        let found_key = space.key_unchecked(&found);
        let is_new = trace.add_vertex(found_key.clone(), found_f);
        // a raw restart point is not a local optimum; edges only join recorded optima
        if start_key != found_key && trace.contains(&start_key) {
            trace.add_edge(start_key, found_key);
        }
        if is_new {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= params.stall_limit {
                return Ok(Termination::Stalled);
            }
        }
    }
    Ok(Termination::TargetReached)
}

/// Result of a batch of independent repeats, in repeat order.
#[derive(Debug)]
pub struct Batch {
    pub runs: Vec<Result<RunTrace, SampleError>>,
    /// Wall-clock time of each repeat.
    pub durations: Vec<Duration>,
}

impl Batch {
    pub fn traces(&self) -> impl Iterator<Item = &RunTrace> {
        self.runs.iter().filter_map(|r| r.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.is_err()).count()
    }
}

/// Runs `r_max` independent repeats; repeat `j` uses seed `params.seed + j`.
///
/// Up to `parallelism` repeats run at once. The evaluator is shared by every
/// repeat. The batch only fails when every repeat failed.
pub fn sample_repeats<E>(
    space: &ConfigurationSpace,
    evaluator: &E,
    params: &SamplerParams,
    r_max: usize,
    parallelism: usize,
) -> Result<Batch, SampleError>
where
    E: FitnessEvaluator + ?Sized,
{
    params.validate()?;
    if r_max == 0 {
        return Err(SampleError::InvalidParams("at least one repeat is required".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| SampleError::InvalidParams(format!("thread pool: {e}")))?;
    let (runs, durations): (Vec<_>, Vec<_>) = pool.install(|| {
        (0..r_max)
            .into_par_iter()
            .map(|j| {
                let p = SamplerParams {
                    seed: params.seed.wrapping_add(j as u64),
                    ..params.clone()
                };
                let start = Instant::now();
                let run = sample_run(space, evaluator, &p);
                (run, start.elapsed())
            })
            .unzip()
    });
    if runs.iter().all(Result::is_err) {
        let errors = runs.into_iter().filter_map(Result::err).collect();
        return Err(SampleError::AllFailed(r_max, errors));
    }
    Ok(Batch { runs, durations })
}
