use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use qpb_cli::{deliver, out_path, run, Cli, EXIT_CONFIG};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = deliver(run(&cli), out_path(&cli));
    if !outcome.diagnostics.is_empty() {
        eprintln!("{}", outcome.diagnostics);
    }
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(&outcome.report).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    ExitCode::from(outcome.code as u8)
}
