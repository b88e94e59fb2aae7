//! `mfc`: solve reflection-band equilibria, sweep parameters, verify the
//! closed forms by simulation, and tabulate profiles.
//!
//! Exit codes: 0 success, 2 config or validation error, 3 numerical
//! failure. All reports are deterministic given config and seed.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Bad input: config file, flags, ranges. Exit code 2.
    Config(String),
    /// A solver or verification failure on valid input. Exit code 3.
    Numeric(String),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SweepParam {
    /// Mean-reversion rate
    Delta,
    /// Diffusion volatility
    Sigma,
    /// Crowd-aversion weight
    Phi,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Delta => "delta",
            SweepParam::Sigma => "sigma",
            SweepParam::Phi => "phi",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Quantity {
    /// Stopping-game value over the band (the marginal value of control)
    U,
    /// Long-run cost along the price rule, as a function of the mean
    V,
    /// Stationary density of the reflected state
    Pdf,
}

/// Reflection-band control: equilibrium solver and Monte Carlo verifier.
#[derive(Parser)]
#[command(name = "mfc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the equilibrium and print a JSON report
    Solve {
        /// JSON config with a `model` block (plus optional `solver`, `sim`)
        config: PathBuf,
        /// Residual tolerance, overriding the config value
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report to this file instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sweep one parameter and emit one equilibrium per grid point as CSV
    Sweep {
        /// JSON config providing the base model
        config: PathBuf,
        /// Which parameter to vary
        #[arg(long, value_enum)]
        param: SweepParam,
        /// First grid value
        #[arg(long)]
        from: f64,
        /// Last grid value (phi sweeps must stay below rho)
        #[arg(long)]
        to: f64,
        /// Number of grid points
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// Residual tolerance, overriding the config value
        #[arg(long)]
        tol: Option<f64>,
        /// Write the CSV to this file instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Verify closed forms against Monte Carlo runs; JSON report
    Simulate {
        /// JSON config; its `sim` block seeds the plan
        config: PathBuf,
        /// Euler time step
        #[arg(long)]
        dt: Option<f64>,
        /// Simulated time per path
        #[arg(long)]
        horizon: Option<f64>,
        /// Initial stretch excluded from averages
        #[arg(long)]
        burn_in: Option<f64>,
        /// Number of independent paths
        #[arg(long)]
        paths: Option<u32>,
        /// RNG seed; precedence: this flag, then MFC_SEED, then config
        #[arg(long)]
        seed: Option<u64>,
        /// Occupation-histogram bins
        #[arg(long)]
        bins: Option<u32>,
        /// Residual tolerance, overriding the config value
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report to this file instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tabulate a profile as CSV
    Profile {
        /// JSON config with the model
        config: PathBuf,
        /// Which profile to tabulate
        #[arg(long, value_enum)]
        quantity: Quantity,
        /// Grid start (default: band edge, or mean - 1 for V)
        #[arg(long)]
        from: Option<f64>,
        /// Grid end (default: band edge, or mean + 1 for V)
        #[arg(long)]
        to: Option<f64>,
        /// Number of grid points (default 201 for U, 4001 for pdf, 41 for V)
        #[arg(long)]
        points: Option<usize>,
        /// Residual tolerance, overriding the config value
        #[arg(long)]
        tol: Option<f64>,
        /// Write the CSV to this file instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn effective_tol(flag: Option<f64>, from_config: f64) -> Result<f64, CliError> {
    let tol = flag.unwrap_or(from_config);
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(CliError::Config(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Solve {
            config,
            tol,
            output,
        } => {
            let loaded = config::load(&config).map_err(CliError::Config)?;
            let tol = effective_tol(tol, loaded.solver.tol)?;
            commands::cmd_solve(&loaded.params, tol, output.as_deref())
        }
        Command::Sweep {
            config,
            param,
            from,
            to,
            steps,
            tol,
            output,
        } => {
            let loaded = config::load(&config).map_err(CliError::Config)?;
            let tol = effective_tol(tol, loaded.solver.tol)?;
            commands::cmd_sweep(loaded.raw, param, from, to, steps, tol, output.as_deref())
        }
        Command::Simulate {
            config,
            dt,
            horizon,
            burn_in,
            paths,
            seed,
            bins,
            tol,
            output,
        } => {
            let loaded = config::load(&config).map_err(CliError::Config)?;
            let tol = effective_tol(tol, loaded.solver.tol)?;
            let mut sim = loaded.sim;
            if let Ok(text) = std::env::var("MFC_SEED") {
                sim.seed = text.trim().parse().map_err(|_| {
                    CliError::Config(format!(
                        "MFC_SEED must be an unsigned integer, got {text:?}"
                    ))
                })?;
            }
            if let Some(v) = dt {
                sim.dt = v;
            }
            if let Some(v) = horizon {
                sim.horizon = v;
            }
            if let Some(v) = burn_in {
                sim.burn_in = v;
            }
            if let Some(v) = paths {
                sim.n_paths = v;
            }
            if let Some(v) = seed {
                sim.seed = v;
            }
            if let Some(v) = bins {
                sim.n_bins = v;
            }
            commands::cmd_simulate(&loaded.params, tol, &sim, output.as_deref())
        }
        Command::Profile {
            config,
            quantity,
            from,
            to,
            points,
            tol,
            output,
        } => {
            let loaded = config::load(&config).map_err(CliError::Config)?;
            let tol = effective_tol(tol, loaded.solver.tol)?;
            commands::cmd_profile(
                &loaded.params,
                tol,
                quantity,
                from,
                to,
                points,
                output.as_deref(),
            )
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
