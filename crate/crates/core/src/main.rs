use std::process::ExitCode;

use clap::Parser;
use env_logger::Env;

use tma_capacity::cli::{run, Cli, CliError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::new().filter_or("TMA_CAP_LOG", "warn")).init();
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(&cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::Validation(v) = &e {
                for x in v {
                    eprintln!("violation: {x}");
                }
            }
            eprintln!("tma-cap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
