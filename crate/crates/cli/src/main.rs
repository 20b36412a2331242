use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use himit_cli::{execute, ExperimentKind, Invocation};

/// Deterministic experiment runner for the coherent-error-mitigation toolkit.
#[derive(Parser)]
#[command(name = "himit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pulse-level propagation and schedule inversion.
    Pulse(RunArgs),
    /// Unitary-folding fidelity sweep over both variants.
    Fold(RunArgs),
    /// Process tomography of one gate under a noise model.
    Qpt(RunArgs),
    /// Variational ground-state search for one mitigation arm.
    Vqe(RunArgs),
    /// Two-axis energy-landscape sweep for one mitigation arm.
    Landscape(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's mitigation arm: ideal, default, hi, or rc.
    #[arg(long)]
    arm: Option<String>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Pulse(args) => (ExperimentKind::Pulse, args),
        Command::Fold(args) => (ExperimentKind::Fold, args),
        Command::Qpt(args) => (ExperimentKind::Qpt, args),
        Command::Vqe(args) => (ExperimentKind::Vqe, args),
        Command::Landscape(args) => (ExperimentKind::Landscape, args),
    };
    let invocation =
        Invocation { config: args.config, seed: args.seed, arm: args.arm, out: args.out };
    match execute(kind, &invocation) {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
