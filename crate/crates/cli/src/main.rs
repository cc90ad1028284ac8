use std::process::ExitCode;

use clap::Parser;
use dicke_cli::app::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(result) => {
            let h = &result.header;
            eprintln!("{}: {} rows, {} of {} points failed", h.mode, result.rows.len(), h.failed_points, h.points);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dicke: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
