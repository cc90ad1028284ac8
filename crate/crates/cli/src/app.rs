//! Command-line surface of the `dicke` binary.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{Mode, Overrides, SweepSpec};
use crate::error::{CliError, Result};
use crate::output::save;
use crate::sweep::{run, SweepResult};

#[derive(Debug, Parser)]
#[command(name = "dicke", version, about = "Sweeps of the driven Dicke model, written as CSV tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML sweep description; built-in grids are used without one.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output table path ("-" for stdout). Overrides `output_path`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Relative tolerance of the time integration.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Γ/2π in MHz, used to convert nanoseconds to 1/Γ.
    #[arg(long = "gamma-mhz", global = true)]
    pub gamma_mhz: Option<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// n_e(t) and collective observables from the ground state.
    Dynamics,
    /// Steady states over an (Ñ, Ω) grid.
    Steady,
    /// Steady states over an (Ñ, β) grid, with the mean-field prediction.
    PhaseDiagram,
    /// Screening parameter x(β) from the self-consistent equation.
    Screening,
    /// Cooperativity μ of a Gaussian cloud.
    Mu,
    /// Effective Rabi frequency fitted to simulated n_e(t) traces.
    FitOmegaEff,
    /// Exponent α of γ_SR ∝ Ñ^α at each drive strength.
    FitAlpha,
}

impl Command {
    pub fn mode(self) -> Mode {
        match self {
            Command::Dynamics => Mode::Dynamics,
            Command::Steady => Mode::SteadyState,
            Command::PhaseDiagram => Mode::PhaseDiagram,
            Command::Screening => Mode::ScreeningCurve,
            Command::Mu => Mode::Cooperativity,
            Command::FitOmegaEff => Mode::FitOmegaEff,
            Command::FitAlpha => Mode::FitAlpha,
        }
    }
}

impl Cli {
    pub fn spec(&self) -> Result<SweepSpec> {
        let overrides = Overrides { out: self.out.clone(), tol: self.tol, gamma_mhz: self.gamma_mhz };
        let mode = self.command.mode();
        match &self.config {
            Some(path) => SweepSpec::load(path, mode, &overrides),
            None => SweepSpec::default_for(mode, &overrides),
        }
    }
}

/// Resolves the sweep, runs it and writes the table. The table is written
/// even when every point failed.
pub fn execute(cli: &Cli) -> Result<SweepResult> {
    let spec = cli.spec()?;
    let result = run(&spec, cli.threads)?;
    save(&result, spec.output_path.as_deref())?;
    if result.header.points > 0 && result.header.failed_points == result.header.points {
        let status = result.column("status").expect("status column");
        let first = result.rows.first().map(|r| r[status].render()).unwrap_or_default();
        return Err(CliError::AllPointsFailed { points: result.header.points, first });
    }
    Ok(result)
}
