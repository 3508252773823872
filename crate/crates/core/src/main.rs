use std::process::ExitCode;

use vilenkin_lab::cli::{parse_args, run};

fn main() -> ExitCode {
    let config = match parse_args(std::env::args_os()) {
        Ok(config) => config,
        Err(e) => {
            e.report();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&config) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
