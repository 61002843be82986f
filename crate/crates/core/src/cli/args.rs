//! Flag definitions for the `pertlab` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{Method, RunConfig, Settings};
use super::{execute, exit_code};

#[derive(Debug, Parser)]
#[command(name = "pertlab", version, about = "Perturbation energies by exact, parametric and ghost-regularized routes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact rational energies
    Oracle(CommonArgs),
    /// Parametric ratio J(Ṽn; X) / J(1; X) over cutoffs
    Sc(CommonArgs),
    /// Parametric ratio from direct integration of the order equations
    Shoot(CommonArgs),
    /// Ghost-regularized ratio over a grid of mixing strengths
    Ghost(CommonArgs),
    /// Every method above, in that order
    All(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Even polynomial, e.g. "x^4" or "1/2 x^2 + x^4"
    #[arg(long)]
    pub perturbation: Option<String>,
    /// Highest order to compute
    #[arg(long)]
    pub order: Option<String>,
    /// Single cutoff
    #[arg(long, conflicts_with = "xcut_grid")]
    pub xcut: Option<String>,
    /// Cutoffs as start:stop:step or a comma list
    #[arg(long)]
    pub xcut_grid: Option<String>,
    /// Mixing strengths as a comma list
    #[arg(long)]
    pub sigma_grid: Option<String>,
    /// Relative integration tolerance
    #[arg(long)]
    pub tol: Option<String>,
    /// Fit the ghost ratio in σ and report the σ → 0 value
    #[arg(long)]
    pub extrapolate: bool,
    /// Fit model for --extrapolate (even by default; also quadratic, linear)
    #[arg(long)]
    pub fit: Option<String>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Report path; stdout when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// key = value file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    fn settings(&self) -> Settings {
        Settings {
            perturbation: self.perturbation.clone(),
            order: self.order.clone(),
            xcut: self.xcut.clone(),
            xcut_grid: self.xcut_grid.clone(),
            sigma_grid: self.sigma_grid.clone(),
            tol: self.tol.clone(),
            extrapolate: self.extrapolate.then_some(true),
            fit: self.fit.clone(),
            format: self.format.clone(),
            output: self.output.as_ref().map(|p| p.display().to_string()),
        }
    }
}

impl Command {
    fn split(&self) -> (Method, &CommonArgs) {
        match self {
            Command::Oracle(a) => (Method::Oracle, a),
            Command::Sc(a) => (Method::Sc, a),
            Command::Shoot(a) => (Method::Shoot, a),
            Command::Ghost(a) => (Method::Ghost, a),
            Command::All(a) => (Method::All, a),
        }
    }
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { super::EXIT_CONFIG } else { super::EXIT_OK };
        }
    };
    let (method, args) = cli.command.split();
    let base = match &args.config {
        Some(path) => match Settings::from_config_file(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return exit_code(&e);
            }
        },
        None => Settings::default(),
    };
    match RunConfig::from_settings(method, &base.overlay(args.settings())) {
        Ok(cfg) => execute(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
