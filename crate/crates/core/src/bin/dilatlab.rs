use std::process::ExitCode;

use clap::Parser;
use dilatlab::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let code = match run(&cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dilatlab: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
