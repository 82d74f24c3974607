use std::path::PathBuf;

use accring_cli::commands::{self, CliError};
use accring_cli::config::{parse_config, ConfigError};
use clap::{Parser, Subcommand};

/// Mixed-traffic ring simulation and ACC attack analysis.
#[derive(Parser)]
#[command(name = "accring", version, about)]
struct Cli {
    /// TOML config file; the built-in defaults reproduce the reference
    /// scenario when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one config key, e.g. --set attack.delta=0.06 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Print only essential result values.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate string stability of the configured model and attack.
    Stability,
    /// Search for an attack gain meeting the configured mode and bounds.
    Synthesize,
    /// Run the ring simulation and write a trajectory CSV.
    Simulate {
        /// Output trajectory CSV path.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Sweep ring lengths and write a flow-density CSV.
    Fd {
        /// Output flow-density CSV path.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Recompute the TTC risk table from an existing trajectory CSV.
    Ttc {
        /// Trajectory CSV produced by `simulate`.
        trajectory: PathBuf,
        /// Optional CSV path for the recomputed table.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn run_cli(cli: Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(ConfigError::Parse(format!("{}: {e}", path.display())))
        })?,
        None => String::new(),
    };
    let config = parse_config(&text, &cli.set)?;
    match &cli.command {
        Command::Stability => commands::cmd_stability(&config, cli.quiet),
        Command::Synthesize => commands::cmd_synthesize(&config, cli.quiet),
        Command::Simulate { out } => commands::cmd_simulate(&config, out, cli.quiet),
        Command::Fd { out } => commands::cmd_fd(&config, out, cli.quiet),
        Command::Ttc { trajectory, out } => {
            commands::cmd_ttc(&config, trajectory, out.as_deref(), cli.quiet)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run_cli(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
