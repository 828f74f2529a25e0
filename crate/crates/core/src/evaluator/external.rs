use std::io::Read;
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use super::{EvalError, FitnessEvaluator};
use crate::space::{Configuration, ConfigurationSpace};

const POLL_INTERVAL: Duration = Duration::from_millis(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    Mean,
    #[default]
    Median,
    Min,
}

impl Aggregation {
    pub fn apply(self, samples: &[f64]) -> f64 {
        debug_assert!(!samples.is_empty());
        match self {
            Aggregation::Mean => samples.iter().sum::<f64>() / samples.len() as f64,
            Aggregation::Min => samples.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregation::Median => {
                let mut sorted = samples.to_vec();
                sorted.sort_by(f64::total_cmp);
                let mid = sorted.len() / 2;
                if sorted.len() % 2 == 1 {
                    sorted[mid]
                } else {
                    (sorted[mid - 1] + sorted[mid]) / 2.0
                }
            }
        }
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Self::Mean),
            "median" => Ok(Self::Median),
            "min" => Ok(Self::Min),
            other => Err(format!("unknown aggregation `{other}` (expected mean, median or min)")),
        }
    }
}

/// Counting semaphore capping concurrently running measurement processes.
#[derive(Debug)]
struct ProcessLimiter {
    in_flight: Mutex<usize>,
    freed: Condvar,
    cap: usize,
}

impl ProcessLimiter {
    fn acquire(&self) -> LimiterGuard<'_> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.cap {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        LimiterGuard(self)
    }
}

struct LimiterGuard<'a>(&'a ProcessLimiter);

impl Drop for LimiterGuard<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.0.freed.notify_one();
    }
}

/// Measures fitness by running a shell command per configuration.
///
/// Each `{name}` placeholder in the template is replaced by that option's value
/// token. The last non-empty line of standard output is parsed as the fitness.
#[derive(Debug, Clone)]
pub struct ExternalEvaluator {
    space: ConfigurationSpace,
    template: String,
    timeout: Duration,
    repeats: usize,
    aggregation: Aggregation,
    limiter: Arc<ProcessLimiter>,
}

impl ExternalEvaluator {
    pub fn new(
        space: ConfigurationSpace,
        template: impl Into<String>,
        timeout: Duration,
        repeats: usize,
        aggregation: Aggregation,
        max_in_flight: usize,
    ) -> Result<Self, EvalError> {
        let template = template.into();
        if let Some(missing) = space
            .options()
            .iter()
            .find(|o| !template.contains(&format!("{{{}}}", o.name())))
        {
            return Err(EvalError::Domain(format!(
                "command template has no `{{{}}}` placeholder",
                missing.name()
            )));
        }
        if repeats == 0 {
            return Err(EvalError::Domain("repeats must be at least 1".into()));
        }
        Ok(Self {
            space,
            template,
            timeout,
            repeats,
            aggregation,
            limiter: Arc::new(ProcessLimiter {
                in_flight: Mutex::new(0),
                freed: Condvar::new(),
                cap: max_in_flight.max(1),
            }),
        })
    }

    /// The command line for `x` with every placeholder substituted.
    pub fn command_for(&self, x: &Configuration) -> Result<String, EvalError> {
        self.space.validate(x)?;
        let mut cmd = self.template.clone();
        for (opt, &v) in self.space.options().iter().zip(x.values()) {
            cmd = cmd.replace(&format!("{{{}}}", opt.name()), &opt.domain()[v]);
        }
        Ok(cmd)
    }

    fn run_once(&self, command: &str) -> Result<f64, EvalError> {
        let _slot = self.limiter.acquire();
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| EvalError::MeasurementFailure {
                command: command.to_string(),
                status: format!("spawn failed: {e}"),
            })?;
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = thread::spawn(move || {
            let mut buf = String::new();
            let _ = stdout.read_to_string(&mut buf);
            buf
        });

        let started = Instant::now();
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if started.elapsed() >= self.timeout => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(EvalError::Timeout {
                        command: command.to_string(),
                        timeout: self.timeout,
                    });
                }
                Ok(None) => thread::sleep(POLL_INTERVAL),
                Err(e) => {
                    return Err(EvalError::MeasurementFailure {
                        command: command.to_string(),
                        status: e.to_string(),
                    })
                }
            }
        };
        let output = reader.join().unwrap_or_default();
        if !status.success() {
            return Err(EvalError::MeasurementFailure {
                command: command.to_string(),
                status: status.to_string(),
            });
        }
        let last = output.trim().lines().last().unwrap_or("").trim();
        match last.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(EvalError::Parse {
                command: command.to_string(),
                output: last.to_string(),
            }),
        }
    }
}

impl FitnessEvaluator for ExternalEvaluator {
    fn evaluate(&self, x: &Configuration) -> Result<f64, EvalError> {
        let command = self.command_for(x)?;
        let samples = (0..self.repeats)
            .map(|_| self.run_once(&command))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.aggregation.apply(&samples))
    }
}
