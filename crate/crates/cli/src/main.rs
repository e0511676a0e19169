//! `chronos`: arrival-time distributions, POVM matrices and verification runs for
//! the free quantum clock.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 failed verification.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "chronos", version, about = "Time observable of a free quantum clock")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time amplitudes, density and moments of the configured Gaussian state.
    Distribution(Overrides),
    /// Run every oracle check and write a verification report.
    Verify(Overrides),
    /// Dense matrix of τ((a, b]) and its eigenvalues.
    PovmMatrix(Overrides),
    /// Covariance error for every shift k_min..=k_max.
    CovarianceScan(Overrides),
}

/// Command-line values win over the config file.
#[derive(Args)]
struct Overrides {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    p_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p_max: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_max: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<String>,
    #[arg(long)]
    sigma_p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k_max: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Two damping values, comma separated.
    #[arg(long)]
    epsilon: Option<String>,
    /// `phase`, `exact` or a trapezoid node count.
    #[arg(long)]
    quadrature: Option<String>,
    /// Matrix encoding for povm-matrix: `csv` or `json`.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
}

impl Overrides {
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let flags = [
            ("p_min", &self.p_min),
            ("p_max", &self.p_max),
            ("n", &self.n),
            ("t_min", &self.t_min),
            ("t_max", &self.t_max),
            ("m", &self.m),
            ("p0", &self.p0),
            ("sigma_p", &self.sigma_p),
            ("x0", &self.x0),
            ("a", &self.a),
            ("b", &self.b),
            ("k", &self.k),
            ("k_min", &self.k_min),
            ("k_max", &self.k_max),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("epsilon", &self.epsilon),
            ("quadrature", &self.quadrature),
            ("format", &self.format),
            ("out_dir", &self.out_dir),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

/// Caps rayon's pool at `CHRONOS_THREADS` threads; 0 or unset leaves it automatic.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("CHRONOS_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("CHRONOS_THREADS must be a non-negative integer, got {raw:?}")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot configure {threads} threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    configure_threads()?;
    match cli.command {
        Command::Distribution(o) => commands::distribution(&o.resolve()?),
        Command::Verify(o) => commands::verify(&o.resolve()?),
        Command::PovmMatrix(o) => commands::povm_matrix(&o.resolve()?),
        Command::CovarianceScan(o) => commands::covariance_scan(&o.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("chronos: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
