//! The `lonkit` command line: workspace layout, subcommands and exit codes.
//!
//! A workspace directory holds `space.txt`, `runs/` (one trace per repeat),
//! `lons/`, `reports/` and an optional `config` file of `key=value` defaults
//! for any numeric flag. Flags given on the command line take precedence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::embedding::{embed, similarity_matrix, write_matrix_csv, write_vectors_csv, EmbeddingConfig};
use crate::evaluator::{
    Aggregation, CachedEvaluator, ExternalEvaluator, FitnessEvaluator, NkLandscape, TableEvaluator,
};
use crate::export::{to_dot, to_graphml};
use crate::lon::{prune, Lon};
use crate::metrics::MetricReport;
use crate::sampler::{read_trace, sample_repeats, write_trace, RunTrace, SampleError, SamplerParams};
use crate::space::ConfigurationSpace;
use crate::stability::{detect_stable, summary_json, write_trajectory_csv, StabilityConfig, StabilityError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lonkit", version, about = "Local optima network sampling and analysis")]
pub struct Cli {
    /// Workspace directory.
    #[arg(long, global = true, default_value = ".")]
    pub workspace: PathBuf,
    /// Seed for every random choice of the command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sampling repeats and stability synthesis.
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

// parsed once per process
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run independent sampling repeats and store their traces under runs/.
    Sample(SampleArgs),
    /// Find the number of repeats that gives a stable network.
    Stable(StableArgs),
    /// Prune a network and compute its metrics and funnels.
    Analyze(AnalyzeArgs),
    /// Render a network as DOT, GraphML or JSON.
    Export(ExportArgs),
    /// Embed several networks and correlate the embeddings.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("evaluator").required(true).args(["table", "nk", "exec"])))]
pub struct SampleArgs {
    /// Configuration space file; defaults to the workspace's space.txt.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// CSV of measured configurations.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// NK landscape `n,k,seed`.
    #[arg(long)]
    pub nk: Option<String>,
    /// Measurement command with one `{option}` placeholder per option.
    #[arg(long)]
    pub exec: Option<String>,
    /// Table and command values are to be maximized.
    #[arg(long)]
    pub maximize: bool,
    /// Seconds before a measurement command is killed.
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Measurements per configuration for --exec.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// How repeated measurements are combined
    #[arg(long, value_enum)]
    pub aggregation: Option<AggregationArg>,
    /// Measurement commands running at once.
    #[arg(long)]
    pub max_in_flight: Option<usize>,
    /// Number of independent repeats.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Distinct local optima per repeat.
    #[arg(long)]
    pub target: Option<usize>,
    /// Random samples in the initial perturbation phase
    #[arg(long)]
    pub tau: Option<usize>,
    /// Random one-option steps per kick
    #[arg(long)]
    pub kappa: Option<usize>,
    /// Probability of restarting from a random configuration
    #[arg(long)]
    pub restart_prob: Option<f64>,
    /// Distinct configurations evaluated per repeat
    #[arg(long)]
    pub eval_budget: Option<u64>,
    /// Iterations without a new local optimum before a repeat stops
    #[arg(long)]
    pub stall_limit: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AggregationArg {
    Mean,
    Median,
    Min,
}

#[derive(Debug, Args)]
pub struct StableArgs {
    /// Repeats added per stability round
    #[arg(long)]
    pub step: Option<usize>,
    /// Random subsets drawn per round
    #[arg(long)]
    pub resamples: Option<usize>,
    /// Significance level of the rank-sum tests
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Network file; defaults to lons/stable.json.
    pub lon: Option<PathBuf>,
    /// Report metrics of the network as given.
    #[arg(long)]
    pub no_prune: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Dot,
    Graphml,
    Json,
}

impl ExportFormat {
    fn extension(self) -> &'static str {
        match self {
            ExportFormat::Dot => "dot",
            ExportFormat::Graphml => "graphml",
            ExportFormat::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Network file; defaults to lons/stable.json.
    pub lon: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dot")]
    pub format: ExportFormat,
    /// Output file; defaults to reports/<name>.<format>.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Two or more network files.
    #[arg(required = true)]
    pub lons: Vec<PathBuf>,
    /// Label refinement rounds
    #[arg(long)]
    pub wl_iterations: Option<usize>,
    /// Embedding length
    #[arg(long)]
    pub dimension: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        }
    }
}

fn usage(m: impl std::fmt::Display) -> CliError {
    CliError::Usage(m.to_string())
}

fn failure(m: impl std::fmt::Display) -> CliError {
    CliError::Failure(m.to_string())
}

type CmdResult = Result<i32, CliError>;

const CONFIG_KEYS: &[&str] = &[
    "seed",
    "parallelism",
    "runs",
    "target",
    "tau",
    "kappa",
    "restart_prob",
    "eval_budget",
    "stall_limit",
    "timeout",
    "repeats",
    "max_in_flight",
    "step",
    "resamples",
    "alpha",
    "wl_iterations",
    "dimension",
];

/// Directory layout of one workspace.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub root: PathBuf,
    config: BTreeMap<String, String>,
}

impl Workspace {
    pub fn open(root: &Path) -> Result<Self, CliError> {
        let mut ws = Self {
            root: root.to_path_buf(),
            config: BTreeMap::new(),
        };
        let path = ws.config_path();
        if path.exists() {
            let text = fs::read_to_string(&path).map_err(|e| failure(format!("{}: {e}", path.display())))?;
            ws.config = parse_config(&text)?;
        }
        Ok(ws)
    }

    pub fn space_path(&self) -> PathBuf {
        self.root.join("space.txt")
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.root.join("runs")
    }

    pub fn lons_dir(&self) -> PathBuf {
        self.root.join("lons")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn config_path(&self) -> PathBuf {
        self.root.join("config")
    }

    /// `flag`, else the config value for `key`, else `default`.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.config.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| usage(format!("config value `{key}={raw}`: {e}"))),
            None => Ok(default),
        }
    }

    /// Trace files under runs/, in name order.
    pub fn run_files(&self) -> Result<Vec<PathBuf>, CliError> {
        let dir = self.runs_dir();
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| failure(format!("{}: {e}", dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension().is_some_and(|x| x == "jsonl")
                    && p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("run-"))
            })
            .collect();
        files.sort();
        Ok(files)
    }
}

/// Parses `key=value` lines; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !CONFIG_KEYS.contains(&k) {
            return Err(usage(format!("config line {}: unknown key `{k}`", i + 1)));
        }
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

/// Rounds to four significant digits for human-readable summaries.
pub fn sig4(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.3e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

fn sig4_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), sig4)
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "lon".to_string(), |n| n.to_string_lossy().into_owned())
}

fn producer(command: &str, params: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "params": params,
    })
}

fn producer_line(p: &Value) -> String {
    format!("producer: {p}")
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| failure(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    fs::write(path, bytes).map_err(|e| failure(format!("{}: {e}", path.display())))
}

fn load_lon(path: &Path) -> Result<Lon, CliError> {
    if !path.exists() {
        return Err(usage(format!("{}: no such file", path.display())));
    }
    Lon::load(path).map_err(failure)
}

/// Parses arguments and runs one command. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let ws = Workspace::open(&cli.workspace)?;
    let seed = ws.pick(cli.seed, "seed", 0u64)?;
    let default_threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let parallelism = ws.pick(cli.parallelism, "parallelism", default_threads)?.max(1);
    match &cli.command {
        Command::Sample(a) => cmd_sample(&ws, a, seed, parallelism, out, err),
        Command::Stable(a) => cmd_stable(&ws, a, seed, parallelism, out, err),
        Command::Analyze(a) => cmd_analyze(&ws, a, out),
        Command::Export(a) => cmd_export(&ws, a, out),
        Command::Compare(a) => cmd_compare(&ws, a, seed, out),
    }
}

fn parse_nk(spec: &str) -> Result<(usize, usize, u64), CliError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || usage(format!("--nk expects n,k,seed, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}

fn sample_space(ws: &Workspace, a: &SampleArgs) -> Result<ConfigurationSpace, CliError> {
    let path = a.space.clone().unwrap_or_else(|| ws.space_path());
    if !path.exists() {
        return Err(usage(format!(
            "{}: no configuration space; pass --space or create space.txt in the workspace",
            path.display()
        )));
    }
    ConfigurationSpace::load(&path).map_err(usage)
}

fn cmd_sample(
    ws: &Workspace,
    a: &SampleArgs,
    seed: u64,
    parallelism: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let runs = ws.pick(a.runs, "runs", 300usize)?;
    let defaults = SamplerParams::default();
    let params = SamplerParams {
        tau: ws.pick(a.tau, "tau", defaults.tau)?,
        kappa: ws.pick(a.kappa, "kappa", defaults.kappa)?,
        restart_prob: ws.pick(a.restart_prob, "restart_prob", defaults.restart_prob)?,
        target_optima: ws.pick(a.target, "target", defaults.target_optima)?,
        eval_budget: ws.pick(a.eval_budget, "eval_budget", defaults.eval_budget)?,
        stall_limit: ws.pick(a.stall_limit, "stall_limit", defaults.stall_limit)?,
        seed,
    };
    params.validate().map_err(usage)?;
    if runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }

    let (space, evaluator, descriptor): (ConfigurationSpace, Box<dyn FitnessEvaluator>, String) =
        if let Some(spec) = &a.nk {
            let (n, k, nk_seed) = parse_nk(spec)?;
            let nk = NkLandscape::new(n, k, nk_seed).map_err(usage)?;
            (nk.space(), Box::new(nk), format!("nk:{n},{k},{nk_seed}"))
        } else if let Some(table) = &a.table {
            let space = sample_space(ws, a)?;
            let t = TableEvaluator::load(space.clone(), table, a.maximize).map_err(usage)?;
            (space, Box::new(t), format!("table:{}", file_name(table)))
        } else {
            let template = a.exec.clone().expect("one evaluator is required");
            let space = sample_space(ws, a)?;
            let timeout = ws.pick(a.timeout, "timeout", 60.0f64)?;
            if !(timeout > 0.0 && timeout.is_finite()) {
                return Err(usage("--timeout must be positive"));
            }
            let aggregation = match a.aggregation {
                Some(AggregationArg::Mean) => Aggregation::Mean,
                Some(AggregationArg::Min) => Aggregation::Min,
                Some(AggregationArg::Median) | None => Aggregation::Median,
            };
            let e = ExternalEvaluator::new(
                space.clone(),
                template.clone(),
                Duration::from_secs_f64(timeout),
                ws.pick(a.repeats, "repeats", 1usize)?,
                aggregation,
                ws.pick(a.max_in_flight, "max_in_flight", parallelism)?,
            )
            .map_err(usage)?;
            let e = if a.maximize { Box::new(Negated(e)) as Box<dyn FitnessEvaluator> } else { Box::new(e) };
            (space, e, format!("exec:{template}"))
        };
    let cached = CachedEvaluator::new(space.clone(), evaluator);

    create_dir(&ws.root)?;
    write_file(&ws.space_path(), space.to_text().as_bytes())?;
    let runs_dir = ws.runs_dir();
    create_dir(&runs_dir)?;
    for stale in ws.run_files()? {
        fs::remove_file(&stale).map_err(|e| failure(format!("{}: {e}", stale.display())))?;
    }

    let batch = match sample_repeats(&space, &cached, &params, runs, parallelism) {
        Ok(b) => b,
        Err(SampleError::AllFailed(n, errors)) => {
            for (j, e) in errors.iter().enumerate() {
                let _ = writeln!(err, "run-{j:04}: {e}");
            }
            return Err(failure(format!("all {n} repeats failed")));
        }
        Err(e) => return Err(usage(e)),
    };
    let snapshot = producer(
        "sample",
        json!({
            "evaluator": descriptor,
            "maximize": a.maximize,
            "runs": runs,
            "sampler": params,
        }),
    );
    let width = 4.max(runs.saturating_sub(1).to_string().len());
    let mut failed = 0;
    for (j, (run, elapsed)) in batch.runs.iter().zip(&batch.durations).enumerate() {
        let name = format!("run-{j:0width$}");
        match run {
            Ok(trace) => {
                let mut trace = trace.clone();
                trace.evaluator = Some(descriptor.clone());
                let mut buf = Vec::new();
                write_trace(&trace, Some(&snapshot), &mut buf).map_err(failure)?;
                write_file(&runs_dir.join(format!("{name}.jsonl")), &buf)?;
                let _ = writeln!(
                    out,
                    "{name} seed={} optima={} evaluations={} termination={} time={}s",
                    trace.seed,
                    trace.distinct_optima(),
                    trace.evaluations,
                    trace.termination,
                    sig4(elapsed.as_secs_f64())
                );
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(err, "{name} failed: {e}");
            }
        }
    }
    let stats = cached.stats();
    let _ = writeln!(
        out,
        "{} of {runs} repeats written to {}; {} distinct evaluations",
        runs - failed,
        runs_dir.display(),
        stats.misses
    );
    Ok(if failed > 0 { EXIT_FAILURE } else { EXIT_OK })
}

/// Turns a maximization backend into a minimization one.
struct Negated<E>(E);

impl<E: FitnessEvaluator> FitnessEvaluator for Negated<E> {
    fn evaluate(&self, x: &crate::space::Configuration) -> Result<f64, crate::evaluator::EvalError> {
        self.0.evaluate(x).map(|v| -v)
    }
}

fn load_pool(ws: &Workspace) -> Result<Vec<RunTrace>, CliError> {
    let files = ws.run_files()?;
    let expected = if ws.space_path().exists() {
        Some(ConfigurationSpace::load(&ws.space_path()).map_err(failure)?.fingerprint())
    } else {
        None
    };
    let mut pool = Vec::with_capacity(files.len());
    for f in files {
        let file = fs::File::open(&f).map_err(|e| failure(format!("{}: {e}", f.display())))?;
        let trace = read_trace(BufReader::new(file)).map_err(|e| failure(format!("{}: {e}", f.display())))?;
        if let (Some(want), Some(got)) = (&expected, &trace.space_hash) {
            if want != got {
                return Err(failure(format!(
                    "{}: trace was sampled over a different configuration space",
                    f.display()
                )));
            }
        }
        pool.push(trace);
    }
    Ok(pool)
}

fn cmd_stable(
    ws: &Workspace,
    a: &StableArgs,
    seed: u64,
    parallelism: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let defaults = StabilityConfig::default();
    let config = StabilityConfig {
        step: ws.pick(a.step, "step", defaults.step)?,
        resamples: ws.pick(a.resamples, "resamples", defaults.resamples)?,
        alpha: ws.pick(a.alpha, "alpha", defaults.alpha)?,
        seed,
        parallelism,
    };
    let pool = load_pool(ws)?;
    let result = detect_stable(&pool, &config).map_err(|e| match e {
        StabilityError::InvalidConfig(_) | StabilityError::PoolTooSmall { .. } => usage(e),
        other => failure(other),
    })?;
    let snapshot = producer(
        "stable",
        json!({
            "step": config.step,
            "resamples": config.resamples,
            "alpha": config.alpha,
            "seed": seed,
            "pool": pool.len(),
        }),
    );
    write_file(
        &ws.lons_dir().join("stable.json"),
        result.stable_lon.to_json(Some(&snapshot)).as_bytes(),
    )?;
    let mut csv = Vec::new();
    write_trajectory_csv(&result, Some(&producer_line(&snapshot)), &mut csv).map_err(failure)?;
    write_file(&ws.reports_dir().join("stability.csv"), &csv)?;
    write_file(
        &ws.reports_dir().join("stability.json"),
        summary_json(&result, &config, Some(&snapshot)).as_bytes(),
    )?;
    match result.decision_i {
        Some(i) => {
            let _ = writeln!(out, "stable: decision_i={i} n_stable={}", result.n_stable);
            Ok(EXIT_OK)
        }
        None => {
            let _ = writeln!(out, "not converged: n_stable={}", result.n_stable);
            let _ = writeln!(
                err,
                "warning: no stable group before the pool of {} traces ran out",
                pool.len()
            );
            Ok(EXIT_FAILURE)
        }
    }
}

fn cmd_analyze(ws: &Workspace, a: &AnalyzeArgs, out: &mut dyn Write) -> CmdResult {
    let path = a.lon.clone().unwrap_or_else(|| ws.lons_dir().join("stable.json"));
    let raw = load_lon(&path)?;
    let stem = file_stem(&path);
    let snapshot = producer(
        "analyze",
        json!({ "lon": file_name(&path), "prune": !a.no_prune }),
    );
    let reports = ws.reports_dir();
    let lon = if a.no_prune {
        raw
    } else {
        let pr = prune(&raw);
        let prune_report = json!({
            "removed": pr.removed,
            "removed_multiplicity": pr.removed_multiplicity(),
            "escape_attempts": pr.escape_attempts,
            "passes": pr.passes,
            "producer": snapshot,
        });
        let mut text = serde_json::to_string_pretty(&prune_report).map_err(failure)?;
        text.push('\n');
        write_file(&reports.join(format!("{stem}-prune.json")), text.as_bytes())?;
        write_file(
            &ws.lons_dir().join(format!("{stem}-pruned.json")),
            pr.lon.to_json(Some(&snapshot)).as_bytes(),
        )?;
        pr.lon
    };
    if lon.is_empty() {
        return Err(failure(format!("{}: network has no vertices", path.display())));
    }
    let (report, decomposition) = MetricReport::compute(&lon);

    let mut metrics = serde_json::to_value(&report).map_err(failure)?;
    metrics["producer"] = snapshot.clone();
    let mut text = serde_json::to_string_pretty(&metrics).map_err(failure)?;
    text.push('\n');
    write_file(&reports.join(format!("{stem}-metrics.json")), text.as_bytes())?;

    let key = |v: usize| lon.vertex(v).key.clone();
    let funnels: Vec<Value> = decomposition
        .funnels
        .iter()
        .map(|(&b, members)| {
            json!({
                "base": key(b),
                "fitness": lon.fitness(b),
                "members": members.iter().map(|&m| key(m)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let overlapping: Vec<String> = (0..lon.vertex_count())
        .filter(|&v| decomposition.overlapping[v])
        .map(key)
        .collect();
    let mut text = serde_json::to_string_pretty(&json!({
        "funnels": funnels,
        "overlapping": overlapping,
        "producer": snapshot,
    }))
    .map_err(failure)?;
    text.push('\n');
    write_file(&reports.join(format!("{stem}-funnels.json")), text.as_bytes())?;

    let comment = producer_line(&snapshot);
    let mut bases = decomposition.bases.clone();
    bases.sort_by(|&x, &y| lon.fitness(x).total_cmp(&lon.fitness(y)).then(x.cmp(&y)));
    let mut buf = format!("# {comment}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["rank", "base", "fitness", "out_degree"]).map_err(failure)?;
        for ((rank, degree), b) in report.base_rank_table.iter().zip(&bases) {
            w.write_record([rank.to_string(), key(*b), lon.fitness(*b).to_string(), degree.to_string()])
                .map_err(failure)?;
        }
        w.flush().map_err(failure)?;
    }
    write_file(&reports.join(format!("{stem}-base-ranks.csv")), &buf)?;

    let mut buf = format!("# {comment}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["k", "rcc"]).map_err(failure)?;
        for (k, r) in &report.rcc_curve {
            w.write_record([k.to_string(), r.to_string()]).map_err(failure)?;
        }
        w.flush().map_err(failure)?;
    }
    write_file(&reports.join(format!("{stem}-rcc.csv")), &buf)?;

    let _ = writeln!(out, "VN      {}", report.vn);
    let _ = writeln!(out, "EN      {}", report.en);
    let _ = writeln!(
        out,
        "SPL     {} (reachable {})",
        sig4(report.spl),
        sig4(report.spl_reachable_fraction)
    );
    let _ = writeln!(out, "AC      {}", sig4_opt(report.ac));
    let _ = writeln!(out, "ACC     {}", sig4(report.acc));
    let _ = writeln!(out, "ND      {}", sig4_opt(report.nd));
    let _ = writeln!(out, "funnels {}", report.funnel_count);
    let _ = writeln!(out, "GO      {} (fitness {})", report.global_optimum.as_deref().unwrap_or("-"), sig4_opt(report.global_optimum_fitness));
    let _ = writeln!(out, "GO neighborhood radius {}", report.go_neighborhood_radius);
    Ok(EXIT_OK)
}

fn cmd_export(ws: &Workspace, a: &ExportArgs, out: &mut dyn Write) -> CmdResult {
    let path = a.lon.clone().unwrap_or_else(|| ws.lons_dir().join("stable.json"));
    let lon = load_lon(&path)?;
    let snapshot = producer(
        "export",
        json!({ "lon": file_name(&path), "format": a.format.extension() }),
    );
    let comment = producer_line(&snapshot);
    let text = match a.format {
        ExportFormat::Dot => to_dot(&lon, Some(&comment)),
        ExportFormat::Graphml => to_graphml(&lon, Some(&comment)),
        ExportFormat::Json => lon.to_json(Some(&snapshot)),
    };
    let target = a
        .output
        .clone()
        .unwrap_or_else(|| ws.reports_dir().join(format!("{}.{}", file_stem(&path), a.format.extension())));
    write_file(&target, text.as_bytes())?;
    let _ = writeln!(
        out,
        "wrote {} ({} vertices, {} edges)",
        target.display(),
        lon.vertex_count(),
        lon.edge_count()
    );
    Ok(EXIT_OK)
}

fn cmd_compare(ws: &Workspace, a: &CompareArgs, seed: u64, out: &mut dyn Write) -> CmdResult {
    if a.lons.len() < 2 {
        return Err(usage("compare needs at least two network files"));
    }
    let defaults = EmbeddingConfig::default();
    let config = EmbeddingConfig {
        wl_iterations: ws.pick(a.wl_iterations, "wl_iterations", defaults.wl_iterations)?,
        dimension: ws.pick(a.dimension, "dimension", defaults.dimension)?,
        hash_seed: seed,
    };
    config.validate().map_err(usage)?;

    let mut ids: Vec<String> = Vec::with_capacity(a.lons.len());
    for p in &a.lons {
        let stem = file_stem(p);
        let mut id = stem.clone();
        let mut k = 2;
        while ids.contains(&id) {
            id = format!("{stem}#{k}");
            k += 1;
        }
        ids.push(id);
    }
    let mut vectors = Vec::with_capacity(a.lons.len());
    for (p, id) in a.lons.iter().zip(&ids) {
        let lon = load_lon(p)?;
        let v = embed(&lon, &config).map_err(|e| failure(format!("{}: {e}", p.display())))?;
        vectors.push(v.named(id.clone()));
    }
    let matrix = similarity_matrix(&vectors).map_err(failure)?;

    let snapshot = producer(
        "compare",
        json!({
            "lons": a.lons.iter().map(|p| file_name(p)).collect::<Vec<_>>(),
            "embedding": config,
        }),
    );
    let comment = producer_line(&snapshot);
    let mut buf = Vec::new();
    write_vectors_csv(&vectors, Some(&comment), &mut buf).map_err(failure)?;
    write_file(&ws.reports_dir().join("embeddings.csv"), &buf)?;
    let mut buf = Vec::new();
    write_matrix_csv(&ids, &matrix, Some(&comment), &mut buf).map_err(failure)?;
    write_file(&ws.reports_dir().join("similarity.csv"), &buf)?;

    for (id, row) in ids.iter().zip(&matrix) {
        let cells: Vec<String> = row.iter().map(|&x| sig4(x)).collect();
        let _ = writeln!(out, "{id}: {}", cells.join(" "));
    }
    Ok(EXIT_OK)
}
