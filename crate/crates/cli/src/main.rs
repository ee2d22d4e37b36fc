use std::process::ExitCode;

use clap::Parser;
use wallace_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match wallace_cli::run(cli.command) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
