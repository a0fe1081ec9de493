//! Drives the config-based runner in-process and prints the CSV it would
//! write.
//!
//!     cargo run --release --example experiment_run [config.toml]

use urysohn::cli::{dry_run, execute, results_csv, RunConfig};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/lin1.toml").to_string());
    let text = std::fs::read_to_string(&path).expect("readable config");
    let config = RunConfig::parse(&text).unwrap_or_else(|e| panic!("{path}: {e}"));
    let run = || -> Result<(), urysohn::cli::CliError> {
        print!("{}", dry_run(&config)?);
        let results = execute(&config)?;
        print!("{}", results_csv(&results));
        Ok(())
    };
    if let Err(e) = run() {
        eprintln!("error: {}", e.message);
        std::process::exit(e.status as i32);
    }
}
