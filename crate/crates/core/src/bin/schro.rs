use std::process::ExitCode;

use clap::Parser;
use schro::cli::{self, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = cli::init_threads() {
        eprintln!("schro: {e}");
        return ExitCode::from(cli::EXIT_CONFIG as u8);
    }
    let outcome = cli::run(&Cli::parse());
    println!("{}", outcome.json());
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    ExitCode::from(outcome.code as u8)
}
