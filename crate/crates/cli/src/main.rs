use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use tracekit_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match execute(&cli).and_then(|out| out.commit().map(|()| out)) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    for note in &output.notes {
        eprintln!("{note}");
    }
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(output.stdout.as_bytes()).and_then(|()| stdout.flush()).is_err() {
        return ExitCode::FAILURE;
    }
    if output.incomplete {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
