//! `peakon`: simulate truncated peakon systems, inspect spectra, run the
//! acceptance criteria and emit wave profiles.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical failure.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{SweepArgs, VerifyArgs, WavefieldArgs};
use crate::config::Overrides;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "peakon", version, about = "Camassa-Holm peakon dynamics via peakon ODEs and the Toda factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a state; write trajectory, ledger and manifest.
    Simulate(Overrides),
    /// Eigenvalues and first eigenvector components of the Lax matrix.
    Spectrum(Overrides),
    /// Run acceptance criteria.
    Verify(VerifyArgs),
    /// Sample u(x,t) from a trajectory CSV.
    Wavefield(WavefieldArgs),
    /// Long-time sorting and scattering report.
    Asymptotics(Overrides),
    /// Asymptotics runs over several n (and seeds) in parallel.
    Sweep(SweepArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(o) => commands::simulate(o),
        Command::Spectrum(o) => commands::spectrum(o),
        Command::Verify(a) => commands::verify(a),
        Command::Wavefield(a) => commands::wavefield(a),
        Command::Asymptotics(o) => commands::asymptotics(o),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    if let CliError::Numerical { dir: Some(dir), .. } = e {
        let diag = e.diagnostic();
        let text = serde_json::to_string_pretty(&diag).expect("diagnostic");
        if std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join("failure.json"), &text)).is_err() {
            eprintln!("{text}");
        }
    }
    ExitCode::from(e.code())
}
