//! `quietlaser`: closed-form spectra, Monte Carlo runs, cavity design and
//! oracle validation for the single-electron battery-driven laser.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quietlaser_core::FrequencyGrid;

#[derive(Parser, Debug)]
#[command(
    name = "quietlaser",
    version,
    about = "Jump statistics of a single-electron laser"
)]
#[command(
    after_help = "Any subcommand also takes --config FILE with key = value lines; \
flags on the command line override the file.\n\
Environment: QUIETLASER_SEED (default seed), QUIETLASER_THREADS (worker threads)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form spectrum and noise summary
    Analytic(AnalyticArgs),
    /// Monte Carlo jump trajectories: estimated spectrum and Fano factor
    Simulate(SimulateArgs),
    /// Physical cavity design in SI units
    Design(DesignArgs),
    /// Run the oracle checks and print a pass/fail table
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct AnalyticArgs {
    /// Jump half-rate gamma
    #[arg(long)]
    gamma: f64,
    /// Rabi frequency
    #[arg(long)]
    rabi: f64,
    /// start:stop:count{log|lin}; defaults to 0.01*gamma .. 100*gamma, 200 log points
    #[arg(long)]
    omega_grid: Option<FrequencyGrid>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SimulateArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    rabi: f64,
    #[arg(long, default_value_t = 50)]
    trajectories: usize,
    /// Length of every trajectory
    #[arg(long, default_value_t = 40_200.0)]
    horizon: f64,
    /// Counting window for the Fano factor
    #[arg(long, default_value_t = 200.0)]
    window: f64,
    /// Defaults to 0.1*gamma .. 10*gamma, 40 log points
    #[arg(long)]
    omega_grid: Option<FrequencyGrid>,
    /// Master seed; falls back to QUIETLASER_SEED, then to a random value
    #[arg(long, env = "QUIETLASER_SEED")]
    seed: Option<u64>,
    /// Replace the jump law by a Poisson process of the same mean rate
    #[arg(long)]
    poisson_control: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct DesignArgs {
    /// Minimum-noise design holding one photon's worth of energy
    #[arg(long, conflicts_with_all = ["pump_rate", "volume"])]
    paper_example: bool,
    /// Injection rate J [1/s]
    #[arg(long, required_unless_present = "paper_example")]
    pump_rate: Option<f64>,
    /// Photon lifetime [s]
    #[arg(long)]
    tau_p: f64,
    /// Capacitance volume [m^3]
    #[arg(long, required_unless_present = "paper_example")]
    volume: Option<f64>,
    /// Transition frequency [Hz]
    #[arg(long, default_value_t = 1.42e9)]
    nu: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct ValidateArgs {
    /// Closed-form and quadrature checks only
    #[arg(long)]
    quick: bool,
    #[arg(long, env = "QUIETLASER_SEED", default_value_t = 1)]
    seed: u64,
    /// Corrupt one reference value (exercises the failure path)
    #[arg(long, hide = true)]
    inject_fault: bool,
}

/// Process exit codes.
pub mod exit {
    pub const VALIDATION_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const NO_STEADY_STATE: u8 = 3;
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit::USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    let threads = match commands::configure_threads() {
        Ok(t) => t,
        Err(f) => return f.report(),
    };
    let outcome = match cli.command {
        Command::Analytic(a) => commands::analytic(a, threads),
        Command::Simulate(a) => commands::simulate(a, threads),
        Command::Design(a) => commands::design(a, threads),
        Command::Validate(a) => commands::validate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
