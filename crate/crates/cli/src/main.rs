mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;

use crate::args::{parse_args, ParseError};
use crate::commands::execute;

fn main() -> ExitCode {
    let config = match parse_args(std::env::args_os(), std::env::var("RADAR_OUT").ok()) {
        Ok(config) => config,
        Err(ParseError::Clap(e)) => {
            // help/version exit 0; genuine usage problems exit 2
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
        Err(ParseError::Usage(message)) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    match execute(&config) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
