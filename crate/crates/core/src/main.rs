use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qbdissim::cli::{self, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qbdissim", version, about = "Dissipative quantum-battery experiments")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its CSV and JSON sidecar.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory that relative output paths are resolved against.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "QBDISSIM_THREADS")]
        threads: Option<usize>,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Show the available experiments.
    List {
        /// Print the catalog as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn execute(args: Args) -> Result<(), CliError> {
    match args.command {
        Command::Run { config, out, threads } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = cli::run(&cfg, out.as_deref(), threads)?;
            println!("wrote {} rows to {}", summary.rows, summary.csv.display());
            if !summary.converged {
                eprintln!("warning: some tolerances were not met, see {}", summary.sidecar.display());
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = cli::validate(&cfg);
            if report.is_empty() {
                println!("ok");
                Ok(())
            } else {
                Err(CliError::Config(report.join("\n")))
            }
        }
        Command::List { json } => {
            let catalog = cli::list_experiments();
            if json {
                println!("{}", serde_json::to_string_pretty(&catalog).expect("catalog serializes"));
            } else {
                for e in catalog {
                    println!("{:<22} {:<17} {}", e.name, e.figure, e.summary);
                    println!("{:<22} required: {}", "", e.required.join(", "));
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
