//! Command-line entry point. All logic lives in the library; this
//! binary only maps subcommands onto `phaseflow::cli` operations.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "phaseflow", about = "Spectral phase-field flows on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Run a simulation described by a TOML config
    Run { config: PathBuf },
    /// Print the transition-profile constants and potential table
    Profile,
    /// Print the energy report of a stored snapshot
    Energy { snapshot: PathBuf },
    /// Sharp-interface benchmarks
    #[command(subcommand)]
    Bench(BenchCommands),
}

#[derive(Subcommand)]
enum BenchCommands {
    /// Compare both diffuse schemes against the radius ODE for a ball
    Radius { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Commands::Run { config } => phaseflow::cli::cmd_run(&config),
        Commands::Profile => phaseflow::cli::cmd_profile(),
        Commands::Energy { snapshot } => phaseflow::cli::cmd_energy(&snapshot),
        Commands::Bench(BenchCommands::Radius { config }) => {
            phaseflow::cli::cmd_bench_radius(&config)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
