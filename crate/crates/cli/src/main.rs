mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] vargamma::Error),
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("serialization: {0}")]
    Serialize(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Usage(_) => "UsageError",
            CliError::Config(_) => "ConfigError",
            CliError::Io(_) => "Io",
            CliError::Serialize(_) => "SerializationError",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "vargamma", version, about = "Variance-Gamma simulation, estimation and option pricing")]
struct Cli {
    /// Flat TOML file with defaults for seed, reps, dt, model, out and quadrature tolerances
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate Brownian, Gamma-subordinator or VG paths to CSV
    Simulate(SimulateArgs),
    /// Fit Gaussian and/or VG models to log returns of a price series
    Fit(FitArgs),
    /// Likelihood-ratio statistic and χ² p-value
    Lrt(LrtArgs),
    /// European call prices under VG and Black-Scholes
    Price(PriceArgs),
    /// Weekly risk-neutral calibration of Black-Scholes and VG to call quotes
    Calibrate(CalibrateArgs),
    /// Monte Carlo variances of the Laplace location and scale estimators
    Efficiency(EfficiencyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProcessKind {
    Bm,
    Gamma,
    Vg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    Gaussian,
    Vg,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuoteModel {
    Bs,
    Vg,
    Both,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub process: ProcessKind,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub t_max: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; with several paths, path i goes to `<stem>_<i>.<ext>`
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FitArgs {
    /// Price series CSV with header `date,close`
    #[arg(long)]
    pub returns: PathBuf,
    #[arg(long, value_enum)]
    pub model: Option<FitModel>,
    /// Length of one return period
    #[arg(long)]
    pub dt: Option<f64>,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct LrtArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub null_loglik: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alt_loglik: f64,
    #[arg(long, default_value_t = 1)]
    pub df: u32,
}

#[derive(Args)]
pub struct PriceArgs {
    #[arg(long)]
    pub s0: f64,
    #[arg(long)]
    pub strike: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rate: f64,
    /// Time to expiry in years
    #[arg(long)]
    pub maturity: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub nu: f64,
    /// `LO:HI:N`, N equally spaced strikes including both ends
    #[arg(long)]
    pub strike_grid: Option<String>,
    /// CSV with columns `strike,vg,black_scholes`
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// Quote CSV with header `date,spot,rate,strike,maturity_days,mid_price`
    #[arg(long)]
    pub quotes: PathBuf,
    #[arg(long, value_enum)]
    pub models: Option<QuoteModel>,
    /// Per-week CSV report
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EfficiencyArgs {
    /// Laplace scale
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// `LO:HI:STEP` sample sizes
    #[arg(long)]
    pub n_grid: String,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a, &config, &mut stdout),
        Command::Fit(a) => commands::fit(&a, &config, &mut stdout),
        Command::Lrt(a) => commands::lrt(&a, &mut stdout),
        Command::Price(a) => commands::price(&a, &config, &mut stdout),
        Command::Calibrate(a) => commands::calibrate(&a, &config, &mut stdout),
        Command::Efficiency(a) => commands::efficiency(&a, &config, &mut stdout),
    }
}

fn report(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("UsageError", e.to_string().trim_end());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(e.kind(), &e.to_string());
            ExitCode::from(e.exit_code())
        }
    }
}
