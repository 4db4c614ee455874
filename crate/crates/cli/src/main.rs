use clap::{Args, Parser, Subcommand};
use epsilon_strong::options::MarketParams;
use epsilon_strong_cli::{
    describe, format_summary, run_experiment, summarize, CliError, Estimator, Experiment, ExperimentConfig,
    OutputFormat,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "eps-strong", version, about = "Epsilon-strong Brownian simulation experiments")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Recompute the summary of a per-sample output file.
    Summarize {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    n0: usize,
    #[arg(long, default_value_t = 10)]
    nmax: usize,
    /// Euler step size; required for euler-* experiments.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum, default_value_t = Estimator::Uniform)]
    estimator: Estimator,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    r: f64,
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    s0: f64,
    #[arg(long, default_value_t = 1.0)]
    strike: f64,
    #[arg(long, default_value_t = 1.0)]
    maturity: f64,
    #[arg(long, default_value_t = 0.75)]
    barrier_lo: f64,
    #[arg(long, default_value_t = 1.25)]
    barrier_hi: f64,
    /// Start of the tan-diffusion transition.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x0: f64,
    /// Length of the tan-diffusion transition.
    #[arg(long, default_value_t = 0.5)]
    time: f64,
    /// Per-sample records go here; the summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    dump_layers: Option<PathBuf>,
    #[arg(long)]
    dump_dominating: Option<PathBuf>,
    /// Print a one-line human summary to stderr.
    #[arg(long)]
    verbose: bool,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let experiment = self
            .experiment
            .ok_or_else(|| CliError::Config("--experiment is required".into()))?;
        let mut cfg = ExperimentConfig::new(experiment, self.samples, self.seed);
        cfg.n0 = self.n0;
        cfg.n_max = self.nmax;
        cfg.delta = self.delta;
        cfg.estimator = self.estimator;
        cfg.market = MarketParams {
            r: self.r,
            sigma: self.sigma,
            s0: self.s0,
            strike: self.strike,
            maturity: self.maturity,
            barrier_lo: self.barrier_lo,
            barrier_hi: self.barrier_hi,
        };
        cfg.tan_x0 = self.x0;
        cfg.tan_time = self.time;
        cfg.out = self.out.clone();
        cfg.format = self.format;
        cfg.workers = self.workers;
        cfg.dump_layers = self.dump_layers.clone();
        cfg.dump_dominating = self.dump_dominating.clone();
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Summarize { file, format }) => summarize(&file).map(|s| (s, format, false)),
        None => cli
            .run
            .config()
            .and_then(|cfg| run_experiment(&cfg).map(|s| (s, cfg.format, cli.run.verbose))),
    };
    match result {
        Ok((summary, format, verbose)) => {
            print!("{}", format_summary(&summary, format));
            if verbose {
                eprintln!("{}", describe(&summary));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("eps-strong: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
