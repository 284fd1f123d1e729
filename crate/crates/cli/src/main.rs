use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    kicklens_cli::main_with(kicklens_cli::Cli::parse())
}
