//! `qpt` — command-line front end for the variational polaron solver.
//!
//! Exit codes: 0 success, 1 invalid input/configuration, 2 numerical
//! failure (no convergence, collapsed gap, bracketing failure, …).

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::Parser;

use commands::{ExponentsArgs, OracleArgs, PhaseArgs, ScanArgs, ScanKind, SolveArgs};
use config::{CliError, FileConfig};

#[derive(Debug, Parser)]
#[command(
    name = "qpt",
    version,
    about = "Ground state and quantum phase transition of two qubits in a common Ohmic/sub-Ohmic bath"
)]
struct Cli {
    /// JSON file supplying defaults for any long flag (flags win).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Run the built-in regression suite against the committed golden files.
    #[arg(long)]
    golden: bool,

    /// With --golden: rewrite the golden files instead of diffing.
    #[arg(long, requires = "golden")]
    update_golden: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Ground-state observables at one parameter point (JSON by default).
    Solve(SolveArgs),
    /// Trace the delocalized–localized boundary α_c along Δ or K.
    Phase(PhaseArgs),
    /// Entanglement entropy over a coupling window (auto-clamped to validity).
    Entropy(ScanArgs),
    /// Spin–spin correlation over a coupling window (auto-clamped to validity).
    Corr(ScanArgs),
    /// The five critical exponents δ, γ, β, β′, ζ at one bath exponent.
    Exponents(ExponentsArgs),
    /// Variational-bound check against exact diagonalization on a discrete bath.
    Oracle(OracleArgs),
}

/// Honor `QPT_THREADS` before any parallel region spins up the default
/// pool. Unset means rayon's own default (all cores).
fn thread_pool_from_env() -> Result<(), CliError> {
    let raw = match std::env::var("QPT_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(CliError::validation(format!("env `QPT_THREADS`: {e}"))),
        Ok(raw) => raw,
    };
    let n: usize = raw.trim().parse().unwrap_or(0);
    if n == 0 {
        return Err(CliError::validation(format!(
            "env `QPT_THREADS`: expected a positive integer, got {raw:?}"
        )));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::validation(format!("env `QPT_THREADS`: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    thread_pool_from_env()?;
    let file = FileConfig::load(cli.config.as_deref())?;
    if cli.golden {
        if cli.command.is_some() {
            return Err(CliError::validation(
                "flag `--golden`: runs the built-in suite; drop the subcommand",
            ));
        }
        return commands::run_golden(cli.update_golden);
    }
    match &cli.command {
        None => Err(CliError::validation(
            "missing subcommand (run `qpt --help` for the list)",
        )),
        Some(Command::Solve(a)) => commands::run_solve(a, &file),
        Some(Command::Phase(a)) => commands::run_phase(a, &file),
        Some(Command::Entropy(a)) => commands::run_scan(a, &file, ScanKind::Entropy),
        Some(Command::Corr(a)) => commands::run_scan(a, &file, ScanKind::Corr),
        Some(Command::Exponents(a)) => commands::run_exponents(a, &file),
        Some(Command::Oracle(a)) => commands::run_oracle(a, &file),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            // Bad flags are configuration errors: report on stderr, exit 1.
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    log::debug!("parsed: {cli:?}");
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code);
    }
}
