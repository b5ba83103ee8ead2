//! Command-line front end for the series pipeline.
//!
//! Exit codes: 0 success, 1 configuration error, 2 pipeline or domain
//! error, 3 a diagnostic residual family exceeded its tolerance.

pub mod commands;
pub mod config;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PIPELINE: i32 = 2;
pub const EXIT_DIAGNOSTIC: i32 = 3;

/// Environment switch for exact-rational arithmetic where inputs allow it.
pub const RATIONAL_ENV: &str = "ABELPROP_RATIONAL";

#[derive(Debug, Parser)]
#[command(
    name = "abelprop",
    version,
    about = "Analytic series solutions of the blockchain virus-propagation model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Series solution: coefficient table and sampled trajectory.
    Solve(CommonArgs),
    /// RK4 reference trajectory of the full system with conservation drift.
    Reference(CommonArgs),
    /// Cubic data, depressed form, discriminants, roots and shifts.
    Roots(RootsArgs),
    /// Residual report for the series solution.
    Validate(CommonArgs),
    /// Series vs. reference deviation table.
    Compare(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario file of `key = value` lines.
    #[arg(long)]
    pub config: PathBuf,
    /// Series order; overrides `order`.
    #[arg(long)]
    pub order: Option<usize>,
    /// `+` or `-`; overrides `branch`.
    #[arg(long, allow_hyphen_values = true)]
    pub branch: Option<String>,
    /// Output directory; overrides `out_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Allow the cosine-parametrization roots when Δ₁ < 0 (three distinct
    /// real roots), which Cardano's formula does not cover.
    #[arg(long)]
    pub trig: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RootsArgs {
    /// Scenario file; the cubic is fitted to its initial state.
    #[arg(long, required_unless_present = "cubic")]
    pub config: Option<PathBuf>,
    /// Synthetic cubic `D,E,F,G` instead of one derived from a scenario.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "config")]
    pub cubic: Option<String>,
    /// Allow the cosine-parametrization roots when Δ₁ < 0.
    #[arg(long)]
    pub trig: bool,
}

fn rational_mode() -> bool {
    std::env::var(RATIONAL_ENV).is_ok_and(|v| v == "1")
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut stdout = std::io::stdout().lock();
    match commands::dispatch(&cli.command, rational_mode(), &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
