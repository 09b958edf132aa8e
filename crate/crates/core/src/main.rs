use std::process::ExitCode;

use clap::Parser;
use tensorfact::cli::{exit, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &output.body) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(exit::FAILURE as u8);
                    }
                }
                None => print!("{}", output.body),
            }
            ExitCode::from(exit::OK as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
