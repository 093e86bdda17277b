use std::process::ExitCode;

use clap::Parser;
use confbill::cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("confbill: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
