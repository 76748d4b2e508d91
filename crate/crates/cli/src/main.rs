use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ordtune_cli::{
    cmd_bound_sweep, cmd_engine, cmd_nu_estimate, cmd_oracle_compare, cmd_scenario_compare,
    CliError, ExperimentConfig, Overrides, Status,
};

/// Sequential certification of ordinal tuning, and its stopping-time bounds.
///
/// Exit codes: 0 success, 1 output error, 2 config error, 3 cap exhausted,
/// 4 validation violation.
#[derive(Parser)]
#[command(name = "ordtune", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Tune, then test each selected candidate on a fresh realisation
    Tune,
    /// Run the stopping rule and report the certificate
    Certify,
    /// Optimised stopping-time bound over an n grid
    BoundSweep,
    /// Certified bound against quadrature and Monte-Carlo oracles
    OracleCompare,
    /// Lattice estimates of the non-Gaussian shortfall
    NuEstimate,
    /// Scenario-approach sample count against the stopping bound
    ScenarioCompare,
}

#[derive(Args)]
struct Flags {
    /// TOML experiment file; defaults apply when absent
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    repetitions: Option<u64>,
    /// Output directory; falls back to $ORDTUNE_OUT_DIR, then `.`
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    beta1: Option<f64>,
    #[arg(long, global = true)]
    beta2: Option<f64>,
    #[arg(long, global = true)]
    j_star: Option<f64>,
    #[arg(long, global = true)]
    initial_n: Option<u64>,
    #[arg(long, global = true)]
    max_n: Option<u64>,
    /// Target probability α₀ for bound commands and copula sources
    #[arg(long, global = true)]
    alpha0: Option<f64>,
    /// Correlation ρ₀ for bound commands and Gaussian copula sources
    #[arg(long, global = true)]
    rho0: Option<f64>,
    #[arg(long, global = true)]
    mc_trials: Option<u64>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            repetitions: self.repetitions,
            out_dir: self.out_dir.clone(),
            delta: self.delta,
            beta1: self.beta1,
            beta2: self.beta2,
            j_star: self.j_star,
            initial_n: self.initial_n,
            max_n: self.max_n,
            alpha0: self.alpha0,
            rho0: self.rho0,
            mc_trials: self.mc_trials,
        }
    }
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    let cfg = ExperimentConfig::load(cli.flags.config.as_deref(), &cli.flags.overrides())?;
    match cli.command {
        Command::Tune => cmd_engine(&cfg, true),
        Command::Certify => cmd_engine(&cfg, false),
        Command::BoundSweep => cmd_bound_sweep(&cfg),
        Command::OracleCompare => cmd_oracle_compare(&cfg),
        Command::NuEstimate => cmd_nu_estimate(&cfg),
        Command::ScenarioCompare => cmd_scenario_compare(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
