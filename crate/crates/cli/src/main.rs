//! `admcurve`: model-free bounds, arbitrage detection and admissible curve
//! construction from OIS and CDS quotes.

mod commands;
mod error;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "admcurve", version, about = "Arbitrage-free bounds and admissible term structures")]
struct Cli {
    /// Report wall-clock time on stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact discount factors and model-free bounds from OIS par rates.
    OisBounds {
        /// CSV with header `maturity_years,rate` (rates as decimals).
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sampling step of the envelope file, in years.
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Model-free survival bounds from CDS spreads.
    CdsBounds {
        /// CSV with header `maturity_years,spread_bp`.
        input: PathBuf,
        #[command(flatten)]
        credit: CreditArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scan quotes for static arbitrage; exits with status 2 when one is found.
    DetectArb {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Ois)]
        kind: Kind,
        #[command(flatten)]
        credit: CreditArgs,
        /// Also write the report to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a piecewise-constant mean-reversion level to the quotes.
    Calibrate {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Ois)]
        kind: Kind,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        credit: CreditArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Exact value `T=V` the curve must take; repeatable.
        #[arg(long = "constraint", value_parser = input::parse_constraint)]
        constraints: Vec<(f64, f64)>,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Calibrate once per parameter value, in parallel.
    Sweep {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Ois)]
        kind: Kind,
        /// Parameter varied across runs.
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma separated parameter values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        credit: CreditArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample `alpha P_1 + (1 - alpha) P_2` for two calibrated curves.
    Mix {
        /// `curve.json` written by `calibrate`.
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Quotes to reprice with the mix (OIS only).
        #[arg(long)]
        quotes: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Ois,
    Cds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    LevyOu,
    Cir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DriverKind {
    Brownian,
    Gamma,
    Ig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    C,
    X0,
    Lambda,
    A,
    Sigma,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::LevyOu)]
    pub model: ModelKind,
    /// Initial short rate or intensity, as a decimal.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Mean-reversion speed.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Time change of the Lévy driver.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = DriverKind::Gamma)]
    pub driver: DriverKind,
    /// Gamma rate or inverse Gaussian parameter.
    #[arg(long, default_value_t = 200.0)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CreditArgs {
    /// Recovery rate for CDS quotes.
    #[arg(long)]
    pub recovery: Option<f64>,
    /// Flat continuously compounded discount rate.
    #[arg(long, conflicts_with = "discount_curve")]
    pub flat_rate: Option<f64>,
    /// JSON discount curve (tagged curve or a `calibrate` output).
    #[arg(long)]
    pub discount_curve: Option<PathBuf>,
    /// CDS premium payments per year.
    #[arg(long, default_value_t = 4)]
    pub frequency: u32,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Absolute residual tolerance of each bootstrap root.
    #[arg(long)]
    pub residual_tol: Option<f64>,
    /// Absolute tolerance of the jump-term quadrature.
    #[arg(long)]
    pub quadrature_tol: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Gauss-Legendre panels per premium period in CDS protection legs.
    #[arg(long)]
    pub panels: Option<usize>,
    /// Keep solving after a level produces a negative forward rate.
    #[arg(long)]
    pub allow_arbitrage: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::OisBounds { input, out, step } => commands::ois_bounds(&input, &out, step),
        Command::CdsBounds { input, credit, out } => commands::cds_bounds(&input, &credit, &out),
        Command::DetectArb { input, kind, credit, out } => {
            commands::detect_arb(&input, kind, &credit, out.as_deref())
        }
        Command::Calibrate { input, kind, model, credit, solver, constraints, step, out } => {
            commands::calibrate(&input, kind, &model, &credit, &solver, &constraints, step, &out)
        }
        Command::Sweep { input, kind, param, values, model, credit, solver, step, out } => {
            commands::sweep(&input, kind, param, &values, &model, &credit, &solver, step, &out)
        }
        Command::Mix { first, second, alpha, quotes, step, out } => {
            commands::mix(&first, &second, alpha, quotes.as_deref(), step, &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let timing = cli.timing;
    let start = Instant::now();
    let result = run(cli);
    if timing {
        eprintln!("elapsed: {:.3?}", start.elapsed());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostics());
            ExitCode::from(e.exit_code())
        }
    }
}
