use std::process::ExitCode;

use clap::Parser;
use liegauss::cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(&cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("liegauss: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("liegauss: {e}");
            ExitCode::from(2)
        }
    }
}
