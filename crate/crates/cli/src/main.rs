mod commands;
mod error;
mod grid;
mod par;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BoundHornArgs, BoundUrchinArgs, Lt1dArgs, Lt2dArgs, OutputArgs, VerifyArgs};
use error::CliError;

/// Riesz-mean bounds for quasi-bounded domains, with numerical verification.
///
/// Every command writes a CSV table and, when --out or --json is given, a
/// JSON sidecar recording parameters, hypothesis flags and a digest of the CSV.
#[derive(Debug, Parser)]
#[command(name = "spectral-bounds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form bounds on a Λ grid.
    #[command(subcommand)]
    Bound(BoundCommand),
    /// One-dimensional Lieb–Thirring bound against the shooting solver.
    Lt1d(Lt1dArgs),
    /// Finite-difference Riesz means of a truncated horn against the bound.
    Verify(VerifyArgs),
    /// Planar horn with the potential λ|x|^α|y|^{−α}.
    Lt2d(Lt2dArgs),
}

#[derive(Debug, Subcommand)]
enum BoundCommand {
    /// Horns {|x′|·|y|^ν < 1}.
    Horn(BoundHornArgs),
    /// Spiny urchins given by a radius sequence.
    Urchin(BoundUrchinArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let (report, output): (_, &OutputArgs) = match &cli.command {
        Command::Bound(BoundCommand::Horn(a)) => (commands::bound_horn(a)?, &a.output),
        Command::Bound(BoundCommand::Urchin(a)) => (commands::bound_urchin(a)?, &a.output),
        Command::Lt1d(a) => (commands::lt1d(a)?, &a.output),
        Command::Verify(a) => (commands::verify(a)?, &a.output),
        Command::Lt2d(a) => (commands::lt2d(a)?, &a.output),
    };
    report.emit(output.out.as_deref(), output.json.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(spectral_bounds::Error::Resolution { suggested_h, .. }) = &e {
                eprintln!("hint: rerun with --h {suggested_h} or smaller");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
