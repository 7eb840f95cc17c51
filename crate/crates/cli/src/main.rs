//! `qet`: command-line front end for the QET simulator.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;
use config::{Options, Resolved, SEED_ENV};

#[derive(Parser)]
#[command(
    name = "qet",
    version,
    about = "Minimal two-qubit quantum energy teleportation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol estimate and print it as JSON.
    Run(Options),
    /// Exact <V> and <H1> over an (h, k) grid as CSV.
    Sweep(Options),
    /// Free evolution of Bob's local energy after Alice's measurement as CSV.
    Evolve(Options),
    /// Analytic / noiseless / unmitigated / mitigated comparison table.
    Report(Options),
    /// Calibrate a readout-noise model, print the matrix and a mitigated estimate.
    MitigateDemo(Options),
}

type Handler = fn(&Resolved) -> Result<String, Failure>;

fn execute(command: Command) -> Result<(String, Option<std::path::PathBuf>), Failure> {
    let (opts, handler): (Options, Handler) = match command {
        Command::Run(o) => (o, commands::run),
        Command::Sweep(o) => (o, commands::sweep),
        Command::Evolve(o) => (o, commands::evolve),
        Command::Report(o) => (o, commands::report),
        Command::MitigateDemo(o) => (o, commands::mitigate_demo),
    };
    let resolved = Resolved::new(opts, std::env::var(SEED_ENV).ok())?;
    let text = handler(&resolved)?;
    Ok((text, resolved.out()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok((text, out)) => {
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
