//! `ocft` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input (including usage errors), 3 a
//! comparison exceeded its z-score threshold.

mod args;
mod output;
mod run;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::Cli;
use output::render;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            return fail("invalid", "workers must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            return fail("invalid", &e.to_string());
        }
    }
    let start = Instant::now();
    match run::dispatch(&cli.command) {
        Ok(mut outcome) => {
            if cli.timing {
                outcome.record["elapsed_ms"] = serde_json::json!(start.elapsed().as_millis() as u64);
            }
            match render(&outcome.record, cli.format) {
                Ok(text) => print!("{text}"),
                Err(e) => return fail("output", &e.to_string()),
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => fail(run::error_kind(&e), &e.to_string()),
    }
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let v = serde_json::json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{v}");
    ExitCode::from(2)
}
