use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use hypercsp::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // keep 1 and 2 for solver verdicts
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(out) => {
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().write_all(out.stdout.as_bytes());
            let _ = std::io::stderr().write_all(out.stderr.as_bytes());
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
