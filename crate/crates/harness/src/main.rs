use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crystal_harness::{load_config, run_scenario, Mode};

#[derive(Parser)]
#[command(name = "crystal", version, about = "Exponential p-Laplacian crystal surface solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary solve.
    Solve(RunArgs),
    /// Stationary solve of the perturbed problem.
    Perturbed(RunArgs),
    /// Time evolution with the dissipation ledger.
    Evolve(RunArgs),
    /// Backward Euler for the linearized flow.
    Linearized(RunArgs),
    /// One run per value of a parameter axis.
    Sweep(RunArgs),
    /// Property and oracle suite; exit code 3 on any violation.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Solve(a) => (Mode::Solve, a),
        Command::Perturbed(a) => (Mode::Perturbed, a),
        Command::Evolve(a) => (Mode::Evolve, a),
        Command::Linearized(a) => (Mode::Linearized, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Verify(a) => (Mode::Verify, a),
    };
    let config = match load_config(&args.config, mode, args.seed, args.out) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("crystal: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run_scenario(&config) {
        Ok(report) => {
            for note in &report.notes {
                eprintln!("{note}");
            }
            println!("{mode}: wrote {} files to {}", report.files.len(), config.output.dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("crystal: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
