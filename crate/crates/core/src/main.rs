use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use secrely::harness::{
    evaluate_sweep, load_config, load_sweep, run_validation, write_csv, write_figures, write_json,
    HarnessError, MetricKind, MonteCarloOptions, OutputFormat, Pipelines, ValidationOptions,
};
use secrely::QuadratureSettings;

const WORKERS_ENV: &str = "SECRELY_WORKERS";

#[derive(Parser)]
#[command(name = "secrely", version, about = "Secrecy metrics for outdated opportunistic relay selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form metrics over a sweep.
    Analytic(AnalyticArgs),
    /// Closed-form metrics plus Monte Carlo estimates.
    Simulate(SimulateArgs),
    /// Three-way comparison of closed forms, quadrature and Monte Carlo.
    Validate(ValidateArgs),
    /// Writes the figure CSVs and gnuplot scripts.
    Figures(FiguresArgs),
}

#[derive(Args)]
struct Common {
    /// JSON system configuration (SNRs in dB).
    #[arg(long)]
    config: PathBuf,
    /// JSON sweep specification; omitted means the single configured point.
    #[arg(long)]
    sweep: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Add quadrature oracle columns.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add quadrature oracle columns.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, hide = true)]
    corrupt_metric: Option<String>,
}

#[derive(Args)]
struct FiguresArgs {
    /// Output directory.
    #[arg(long, default_value = "figures")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn workers() -> Result<usize, HarnessError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(HarnessError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| HarnessError::Io(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_sweep(common: &Common, format: Format, pipelines: Pipelines) -> Result<(), HarnessError> {
    let n_workers = workers()?;
    let base = load_config(&common.config)?;
    let spec = load_sweep(common.sweep.as_deref(), base)?;
    let rows = evaluate_sweep(&spec, &pipelines, n_workers)?;
    let mut out = open_out(common.out.as_deref())?;
    match format.into() {
        OutputFormat::Csv => write_csv(&mut out, spec.axis, &rows)?,
        OutputFormat::Json => write_json(&mut out, spec.axis, &rows)?,
    }
    out.flush()?;
    Ok(())
}

fn oracle(requested: bool) -> Option<QuadratureSettings> {
    requested.then(QuadratureSettings::default)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Analytic(a) => run_sweep(
            &a.common,
            a.format,
            Pipelines {
                oracle: oracle(a.oracle),
                monte_carlo: None,
            },
        ),
        Command::Simulate(a) => run_sweep(
            &a.common,
            a.format,
            Pipelines {
                oracle: oracle(a.oracle),
                monte_carlo: Some(MonteCarloOptions {
                    n_trials: a.trials,
                    seed: a.seed,
                }),
            },
        ),
        Command::Validate(a) => {
            let corrupt = match a.corrupt_metric.as_deref() {
                None => None,
                Some(s) => Some(
                    MetricKind::parse(s).ok_or_else(|| HarnessError::Config(format!("unknown metric {s:?}")))?,
                ),
            };
            let n_workers = workers()?;
            let base = load_config(&a.common.config)?;
            let spec = load_sweep(a.common.sweep.as_deref(), base)?;
            let options = ValidationOptions {
                n_trials: a.trials,
                seed: a.seed,
                quadrature: QuadratureSettings::default(),
                corrupt,
            };
            let report = run_validation(&spec, &options, n_workers)?;
            let mut out = open_out(a.common.out.as_deref())?;
            write!(out, "{report}")?;
            out.flush()?;
            if report.passed() {
                Ok(())
            } else {
                let mut names: Vec<&str> = report.failures().map(|l| l.metric.name()).collect();
                names.dedup();
                Err(HarnessError::ValidationFailed(format!("failing metrics: {}", names.join(", "))))
            }
        }
        Command::Figures(a) => {
            let files = write_figures(&a.out, workers()?)?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("secrely: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
