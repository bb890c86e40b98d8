use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uhyp::commands::{self, CommandReport};
use uhyp::config;

#[derive(Parser)]
#[command(
    name = "uhyp",
    version,
    about = "Characteristic evolution for the ultrahyperbolic equation: \
             runs, snapshots, and verification suites"
)]
struct Cli {
    /// Configuration file.
    #[arg(long, global = true, default_value = "config.toml")]
    config: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured data; write snapshots and diagnostics.
    Run,
    /// Compare the two cone-integral parametrizations over the test corpus.
    VerifyIdentity,
    /// Compare cone reconstruction against the spectral propagator.
    CrossCheck,
    /// Evaluate the spectral residual over the configured trajectory.
    Residual,
    /// Measure the finite-difference convergence order of the residual.
    Convergence,
}

fn dispatch(cli: &Cli) -> uhyp::Result<CommandReport> {
    let loaded = config::load(&cli.config)?;
    match cli.command {
        Command::Run => {
            // UHYP_OUTPUT_DIR redirects the run output wholesale.
            let redirect = std::env::var_os("UHYP_OUTPUT_DIR").map(PathBuf::from);
            commands::cmd_run(&loaded, redirect.as_deref())
        }
        Command::VerifyIdentity => commands::cmd_verify_identity(&loaded.config),
        Command::CrossCheck => commands::cmd_cross_check(&loaded.config),
        Command::Residual => commands::cmd_residual(&loaded.config),
        Command::Convergence => commands::cmd_convergence(&loaded.config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(report) => {
            report.print();
            if report.ok() {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more checks failed");
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
