//! `emfreeze` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 validation failure, 3 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use emfreeze::runner::{self, parse_config, ExperimentConfig, ExperimentKind};
use emfreeze::{Error, VERSION};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "emfreeze", version, about = "Emergent-Hamiltonian freezing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV tables plus manifest.json.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
    /// Print the named experiments.
    ListExperiments,
    /// Print the version.
    Version,
}

fn load(path: &Path) -> Result<ExperimentConfig, (u8, Error)> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        (
            EXIT_INVALID,
            Error::Config {
                path: path.display().to_string(),
                message: e.to_string(),
            },
        )
    })?;
    let cfg = parse_config(&text).map_err(|e| (EXIT_INVALID, e))?;
    cfg.validate().map_err(|e| (EXIT_INVALID, e))?;
    Ok(cfg)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => EXIT_INVALID,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match cli.command {
        Command::ListExperiments => {
            for k in ExperimentKind::NAMED {
                println!("{k}");
            }
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("emfreeze {VERSION}");
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!("{}: ok ({})", config.display(), cfg.experiment);
                ExitCode::SUCCESS
            }
            Err((code, e)) => {
                eprintln!("error: {e}");
                ExitCode::from(code)
            }
        },
        Command::Run { config, out } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err((code, e)) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(code);
                }
            };
            if let Err(e) = runner::init_threads() {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INVALID);
            }
            match runner::run_experiment(&cfg, out.as_deref()) {
                Ok(run) => {
                    for f in &run.files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            }
        }
    }
}
