use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use raag_sep::cli::{error_json, run, Cli};

fn emit(v: &serde_json::Value) {
    // a closed pipe is not worth a panic
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("json"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(v) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("raag-sep: {e}");
            emit(&error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
