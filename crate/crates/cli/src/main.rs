use clap::Parser;
use slocc_mbqc_cli::{exit_code, run, Cli};

fn main() -> std::process::ExitCode {
    exit_code(run(Cli::parse()))
}
