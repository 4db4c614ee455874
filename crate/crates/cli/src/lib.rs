//! Experiment runner: configuration, replicate-parallel execution with
//! deterministic streams, per-sample records and summaries.
//!
//! Replicate `i` always draws from the stream `seed / 0 / i`, so the output
//! does not depend on how replicates are spread over workers. A replicate
//! whose series comparison stays undecided is rerun on `seed / 1 / i / a`
//! for attempt `a`, and the rerun is counted.

use epsilon_strong::eps_strong::{gap_metrics, run, DOMINATING_CSV_HEADER};
use epsilon_strong::estimators::EstimateRecord;
use epsilon_strong::options::{euler_sample, euler_steps, price_sample, Case, EstimatorKind, MarketParams};
use epsilon_strong::rng::StreamKey;
use epsilon_strong::stats::mean_stderr;
use epsilon_strong::tan_diffusion::sample_transition_counted;
use epsilon_strong::DEFAULT_MAX_TERMS;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Reruns allowed for one replicate before giving up.
pub const MAX_RETRIES: u64 = 16;

pub const SAMPLE_CSV_HEADER: &str = "sample_index,value,generations_used,hit_nmax,bias_bound";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}:{line}: {msg}")]
    Schema { path: String, line: usize, msg: String },
    #[error("sample {index}: {source}")]
    Sample {
        index: u64,
        source: epsilon_strong::Error,
    },
    #[error(transparent)]
    Core(#[from] epsilon_strong::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fa,
    Fb,
    Fc,
    EulerFa,
    EulerFb,
    EulerFc,
    Tan,
    LayersDemo,
}

impl Experiment {
    fn case(self) -> Option<Case> {
        match self {
            Experiment::Fa | Experiment::EulerFa => Some(Case::A),
            Experiment::Fb | Experiment::EulerFb => Some(Case::B),
            Experiment::Fc | Experiment::EulerFc => Some(Case::C),
            _ => None,
        }
    }

    pub fn is_euler(self) -> bool {
        matches!(self, Experiment::EulerFa | Experiment::EulerFb | Experiment::EulerFc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Estimator {
    #[default]
    Uniform,
    Exponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub samples: u64,
    pub seed: u64,
    pub n0: usize,
    pub n_max: usize,
    pub delta: Option<f64>,
    pub estimator: Estimator,
    pub market: MarketParams,
    /// Start and time step for `tan`.
    pub tan_x0: f64,
    pub tan_time: f64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: Option<usize>,
    pub dump_layers: Option<PathBuf>,
    pub dump_dominating: Option<PathBuf>,
    pub max_terms: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, samples: u64, seed: u64) -> Self {
        Self {
            experiment,
            samples,
            seed,
            n0: 2,
            n_max: 10,
            delta: None,
            estimator: Estimator::Uniform,
            market: MarketParams::default(),
            tan_x0: 0.0,
            tan_time: 0.5,
            out: None,
            format: OutputFormat::Csv,
            workers: None,
            dump_layers: None,
            dump_dominating: None,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        match (self.experiment.is_euler(), self.delta) {
            (true, None) => return bad("--delta is required for euler-* experiments".into()),
            (false, Some(_)) => return bad("--delta applies only to euler-* experiments".into()),
            (true, Some(d)) => {
                euler_steps(self.market.maturity, d).map_err(|e| CliError::Config(e.to_string()))?;
            }
            _ => {}
        }
        if self.n0 > self.n_max {
            return bad(format!("n0 = {} exceeds nmax = {}", self.n0, self.n_max));
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if self.max_terms == 0 {
            return bad("max_terms must be positive".into());
        }
        if self.experiment == Experiment::Tan {
            if !(self.tan_x0.abs() < std::f64::consts::FRAC_PI_2) {
                return bad("tan start must lie in (−π/2, π/2)".into());
            }
            if !(self.tan_time > 0.0 && self.tan_time.is_finite()) {
                return bad("tan time step must be positive".into());
            }
        }
        let dumps = self.dump_layers.is_some() || self.dump_dominating.is_some();
        if dumps && self.experiment != Experiment::LayersDemo {
            return bad("--dump-layers and --dump-dominating need experiment layers-demo".into());
        }
        self.market
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// One replicate's output row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_index: u64,
    pub value: f64,
    pub generations_used: usize,
    pub hit_nmax: bool,
    pub bias_bound: f64,
}

impl SampleRecord {
    fn from_estimate(sample_index: u64, e: EstimateRecord) -> Self {
        Self {
            sample_index,
            value: e.value,
            generations_used: e.generations_used,
            hit_nmax: e.hit_nmax,
            bias_bound: e.bias_bound,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.sample_index, self.value, self.generations_used, self.hit_nmax as u8, self.bias_bound
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mean: f64,
    pub stderr: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub wall_time_seconds: f64,
    pub samples: u64,
    pub hit_nmax_fraction: f64,
    /// Mean of the per-sample bias bounds; bounds the bias of `mean`.
    pub bias_bound: f64,
    pub undecided_retries: u64,
    /// Set when a single sample leaves the standard error undefined.
    pub degenerate: bool,
}

impl RunSummary {
    pub fn from_records(records: &[SampleRecord]) -> std::result::Result<Self, String> {
        let values: Vec<f64> = records.iter().map(|r| r.value).collect();
        let (mean, stderr) = mean_stderr(&values).map_err(|_| "no samples".to_string())?;
        let n = records.len() as f64;
        let hits = records.iter().filter(|r| r.hit_nmax).count() as f64;
        Ok(Self {
            mean,
            stderr,
            ci95_low: mean - 1.96 * stderr,
            ci95_high: mean + 1.96 * stderr,
            wall_time_seconds: 0.0,
            samples: records.len() as u64,
            hit_nmax_fraction: hits / n,
            bias_bound: records.iter().map(|r| r.bias_bound).sum::<f64>() / n,
            undecided_retries: 0,
            degenerate: records.len() == 1,
        })
    }

    /// Equality of everything derived from the per-sample records.
    pub fn same_statistics(&self, other: &Self) -> bool {
        self.mean == other.mean
            && self.stderr == other.stderr
            && self.ci95_low == other.ci95_low
            && self.ci95_high == other.ci95_high
            && self.samples == other.samples
            && self.hit_nmax_fraction == other.hit_nmax_fraction
            && self.bias_bound == other.bias_bound
            && self.degenerate == other.degenerate
    }

    /// True when the 95% interval meets `[lo, hi]`.
    pub fn overlaps(&self, lo: f64, hi: f64) -> bool {
        self.ci95_low <= hi && lo <= self.ci95_high
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }

    pub fn to_csv(&self) -> String {
        format!(
            "mean,stderr,ci95_low,ci95_high,wall_time_seconds,samples,hit_nmax_fraction,bias_bound,undecided_retries,degenerate\n{},{},{},{},{},{},{},{},{},{}\n",
            self.mean,
            self.stderr,
            self.ci95_low,
            self.ci95_high,
            self.wall_time_seconds,
            self.samples,
            self.hit_nmax_fraction,
            self.bias_bound,
            self.undecided_retries,
            self.degenerate
        )
    }
}

/// Records and summary of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<SampleRecord>,
    pub summary: RunSummary,
}

fn replicate_key(seed: u64, index: u64, attempt: u64) -> StreamKey {
    let root = StreamKey::new(seed);
    if attempt == 0 {
        root.child(0).child(index)
    } else {
        root.child(1).child(index).child(attempt)
    }
}

/// One replicate on one stream.
fn replicate(cfg: &ExperimentConfig, index: u64, key: &StreamKey) -> epsilon_strong::Result<SampleRecord> {
    let exact = |value: f64, generations_used: usize| SampleRecord {
        sample_index: index,
        value,
        generations_used,
        hit_nmax: false,
        bias_bound: 0.0,
    };
    match cfg.experiment {
        Experiment::Fa | Experiment::Fb | Experiment::Fc => {
            let kind = match cfg.estimator {
                Estimator::Uniform => EstimatorKind::UniformImproved { n0: cfg.n0 },
                Estimator::Exponential => EstimatorKind::Exponential,
            };
            let case = cfg.experiment.case().expect("pricing experiment");
            let rec = price_sample(&cfg.market, case, kind, cfg.n_max, key, cfg.max_terms)?;
            Ok(SampleRecord::from_estimate(index, rec))
        }
        Experiment::EulerFa | Experiment::EulerFb | Experiment::EulerFc => {
            let steps = euler_steps(cfg.market.maturity, cfg.delta.expect("validated"))?;
            let case = cfg.experiment.case().expect("pricing experiment");
            Ok(exact(euler_sample(&cfg.market, case, steps, &mut key.rng()), steps))
        }
        Experiment::Tan => {
            let (y, proposals) = sample_transition_counted(cfg.tan_x0, cfg.tan_time, &mut key.rng(), cfg.max_terms)?;
            Ok(exact(y, proposals))
        }
        Experiment::LayersDemo => {
            let out = demo_run(cfg, key, true)?;
            let gap = gap_metrics(out.trace.last().expect("trace kept")).l1_gap;
            Ok(exact(gap, cfg.n_max))
        }
    }
}

/// Bridge from 0 to a standard Gaussian endpoint over the maturity, run
/// to `n_max` generations.
fn demo_run(
    cfg: &ExperimentConfig,
    key: &StreamKey,
    keep_trace: bool,
) -> epsilon_strong::Result<epsilon_strong::eps_strong::EpsRun> {
    let horizon = cfg.market.maturity;
    let z: f64 = StandardNormal.sample(&mut key.child(0).rng());
    run(0.0, horizon.sqrt() * z, cfg.n_max, &key.child(1), horizon, cfg.max_terms, keep_trace)
}

/// Run a replicate, rerunning undecided attempts on fresh streams.
fn replicate_with_retries(cfg: &ExperimentConfig, index: u64) -> Result<(SampleRecord, u64)> {
    let mut attempt = 0;
    loop {
        match replicate(cfg, index, &replicate_key(cfg.seed, index, attempt)) {
            Ok(rec) => return Ok((rec, attempt)),
            Err(e) if e.is_undecided() && attempt < MAX_RETRIES => attempt += 1,
            Err(source) => return Err(CliError::Sample { index, source }),
        }
    }
}

/// Run all replicates without writing anything.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let work = || -> Result<Vec<(SampleRecord, u64)>> {
        use rayon::prelude::*;
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| replicate_with_retries(cfg, i))
            .collect()
    };
    let results = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let retries = results.iter().map(|(_, a)| a).sum();
    let records: Vec<SampleRecord> = results.into_iter().map(|(r, _)| r).collect();
    let mut summary = RunSummary::from_records(&records).map_err(CliError::Config)?;
    summary.undecided_retries = retries;
    summary.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(RunOutput { records, summary })
}

pub fn records_csv(records: &[SampleRecord]) -> String {
    let mut s = String::with_capacity(32 * (records.len() + 1));
    s.push_str(SAMPLE_CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn records_json(records: &[SampleRecord]) -> String {
    serde_json::to_string(records).expect("records serialize")
}

/// Run, write per-sample records to `out` (if set) and the dumps, and
/// return the summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let output = execute(cfg)?;
    if let Some(path) = &cfg.out {
        let body = match cfg.format {
            OutputFormat::Csv => records_csv(&output.records),
            OutputFormat::Json => records_json(&output.records),
        };
        std::fs::write(path, body)?;
    }
    if cfg.dump_layers.is_some() || cfg.dump_dominating.is_some() {
        let demo = demo_run(cfg, &replicate_key(cfg.seed, 0, 0), true)
            .map_err(|source| CliError::Sample { index: 0, source })?;
        if let Some(path) = &cfg.dump_layers {
            std::fs::write(path, demo.partition.to_text())?;
        }
        if let Some(path) = &cfg.dump_dominating {
            let mut s = String::from(DOMINATING_CSV_HEADER);
            s.push('\n');
            for d in &demo.trace {
                s.push_str(&d.csv_rows());
            }
            std::fs::write(path, s)?;
        }
    }
    Ok(output.summary)
}

pub fn format_summary(summary: &RunSummary, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => summary.to_csv(),
        OutputFormat::Json => summary.to_json() + "\n",
    }
}

fn parse_records_csv(path: &str, text: &str) -> Result<Vec<SampleRecord>> {
    let schema = |line: usize, msg: String| CliError::Schema {
        path: path.to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SAMPLE_CSV_HEADER => {}
        Some((_, h)) => return Err(schema(1, format!("expected header `{SAMPLE_CSV_HEADER}`, found `{h}`"))),
        None => return Err(schema(1, "empty file".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(schema(n, format!("expected 5 fields, found {}", f.len())));
        }
        let num = |k: usize, name: &str| -> Result<f64> {
            f[k].parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| schema(n, format!("{name}: `{}` is not a finite number", f[k])))
        };
        let int = |k: usize, name: &str| -> Result<u64> {
            f[k].parse::<u64>()
                .map_err(|_| schema(n, format!("{name}: `{}` is not a non-negative integer", f[k])))
        };
        let hit = match f[3] {
            "0" | "false" => false,
            "1" | "true" => true,
            other => return Err(schema(n, format!("hit_nmax: `{other}` is not 0 or 1"))),
        };
        let bias_bound = num(4, "bias_bound")?;
        if bias_bound < 0.0 {
            return Err(schema(n, "bias_bound: negative".into()));
        }
        out.push(SampleRecord {
            sample_index: int(0, "sample_index")?,
            value: num(1, "value")?,
            generations_used: int(2, "generations_used")? as usize,
            hit_nmax: hit,
            bias_bound,
        });
    }
    Ok(out)
}

/// Recompute a summary from a per-sample file (CSV, or the JSON array the
/// runner writes with `--format json`).
pub fn summarize(path: &Path) -> Result<RunSummary> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path)?;
    let records = if text.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<SampleRecord>>(&text).map_err(|e| CliError::Schema {
            path: name.clone(),
            line: e.line(),
            msg: e.to_string(),
        })?
    } else {
        parse_records_csv(&name, &text)?
    };
    RunSummary::from_records(&records).map_err(|msg| CliError::Schema {
        path: name,
        line: text.lines().count().max(1),
        msg,
    })
}

/// A compact human-readable summary line.
pub fn describe(summary: &RunSummary) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "mean {:.6} (se {:.2e}), 95% CI [{:.6}, {:.6}], {} samples, hit_nmax {:.4}, bias bound {:.2e}, {:.2}s",
        summary.mean,
        summary.stderr,
        summary.ci95_low,
        summary.ci95_high,
        summary.samples,
        summary.hit_nmax_fraction,
        summary.bias_bound,
        summary.wall_time_seconds
    );
    s
}
