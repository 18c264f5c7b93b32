use std::process::ExitCode;

use dualscore::cli::{self, Parsed};

fn main() -> ExitCode {
    let outcome = cli::parse(std::env::args_os()).and_then(|parsed| match parsed {
        Parsed::Print(text) => Ok(text),
        Parsed::Run(command) => cli::run(command),
    });
    match outcome {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.report_line());
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
