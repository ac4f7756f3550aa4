use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use periodic_orbits::cli::commands;

/// Search for periodic N-body orbits by discrete action minimization.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run multi-start minimizations described by a config file.
    Run { config: PathBuf },
    /// Recompute diagnostics of a trajectory CSV and print a pass/fail table.
    Check { csv: PathBuf, config: PathBuf },
    /// Draw a trajectory CSV as an SVG.
    Plot {
        csv: PathBuf,
        out: PathBuf,
        /// Config used to compute the caption's masses and action.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Grid-refinement study: fitted convergence orders.
    Convergence { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let status = match cli.command {
        Command::Run { config } => commands::run(&config, &mut out),
        Command::Check { csv, config } => commands::check(&csv, &config, &mut out),
        Command::Plot { csv, out: svg, config } => commands::plot(&csv, &svg, config.as_deref(), &mut out),
        Command::Convergence { config } => commands::convergence(&config, &mut out),
    };
    match status {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
