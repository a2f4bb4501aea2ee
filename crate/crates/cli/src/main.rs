use std::process::ExitCode;

use clap::Parser;
use ratiobandit_cli::args::Cli;

fn main() -> ExitCode {
    match ratiobandit_cli::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
