//! Command-line front end for the slocc-mbqc laboratory.

pub mod commands;
pub mod config;
pub mod output;

use clap::{Parser, Subcommand};
use commands::Failure;
use config::{Experiment, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "slocc-mbqc", version, about = "Measurement-based computation on SLOCC-transformed cluster states")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed-form-versus-oracle checks.
    Verify {
        /// Only checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Correlation length table over a (θ, γ) grid.
    FigCorrlength,
    /// Per-step and cumulative B-undo success probabilities.
    FigWalk,
    /// Spanning fractions for bond, site or B-undo lattices.
    Percolation,
    /// Run one protocol instance and log its measurements as JSON lines.
    RunProtocol,
    /// Classify a 2×2 matrix given as 4 real or 8 (re, im) numbers.
    Classify {
        #[arg(allow_negative_numbers = true, num_args = 1..)]
        numbers: Vec<f64>,
    },
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Config(e.to_string()))?;
    }
    let cfg = match &cli.config {
        Some(p) => config::load(p)?,
        None => ExperimentConfig::default(),
    };
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let out = cli.out.clone().or_else(|| cfg.output.clone());
    let out = out.as_deref();
    match cli.command {
        Command::Verify { filter } => commands::verify(filter.as_deref(), out),
        Command::FigCorrlength => {
            cfg.expect(Experiment::Corrlength)?;
            commands::fig_corrlength(&cfg.corrlength.clone().unwrap_or_default(), out)
        }
        Command::FigWalk => {
            cfg.expect(Experiment::Walk)?;
            commands::fig_walk(&cfg.walk.clone().unwrap_or_default(), out)
        }
        Command::Percolation => {
            cfg.expect(Experiment::Percolation)?;
            commands::percolation(&cfg.percolation.clone().unwrap_or_default(), seed, out)
        }
        Command::RunProtocol => {
            cfg.expect(Experiment::Protocol)?;
            let p = cfg.protocol.as_ref().ok_or_else(|| Failure::Config("run-protocol needs a [protocol] section".into()))?;
            commands::run_protocol(p, seed, out)
        }
        Command::Classify { numbers } => commands::classify_cmd(&numbers, out),
    }
}

/// Parses `args` (without the program name) and runs the command.
pub fn run_args<I: IntoIterator<Item = S>, S: Into<std::ffi::OsString> + Clone>(args: I) -> Result<(), Failure> {
    let argv = std::iter::once(std::ffi::OsString::from("slocc-mbqc")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| Failure::Config(e.to_string()))?;
    run(cli)
}

/// Maps a command result to the process exit code, logging failures.
pub fn exit_code(r: Result<(), Failure>) -> ExitCode {
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            output::log("error", serde_json::json!({ "kind": "check", "message": m }));
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            output::log("error", serde_json::json!({ "kind": "config", "message": m }));
            ExitCode::from(2)
        }
    }
}
