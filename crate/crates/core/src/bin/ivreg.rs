use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ivreg::cli::{run, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match run(&config) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error code={} message={}", e.code(), msg);
            ExitCode::FAILURE
        }
    }
}
