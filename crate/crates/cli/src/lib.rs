//! Command-line driver: reads fibration files, dispatches to the library and
//! writes one deterministic JSON report per run.
//!
//! Exit codes: 0 success, 1 malformed input or invalid arguments, 2 budget
//! exceeded or sampling exhausted, 3 internal invariant violation.

mod commands;
pub mod config;
pub mod error;
pub mod input;

use serde_json::{json, Value};

pub use config::{Command, RunConfig};
pub use error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A finished run: the exit code and the report text.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
}

impl Outcome {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.report).expect("reports are valid JSON")
    }
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let mut report = json!({
        "tool": "quadrifold",
        "version": VERSION,
        "command": cfg.command.name(),
        "config": cfg,
        "invariants": null,
    });
    let result = (|| {
        let fib = match cfg.command.fibration_file() {
            Some(path) => Some(input::Source::read(path)?.fibration()?),
            None => None,
        };
        if let Some(fib) = &fib {
            report["invariants"] = json!(fib.invariants());
        }
        commands::execute(cfg, fib.as_ref())
    })();
    let code = match result {
        Ok(value) => {
            report["result"] = value;
            0
        }
        Err(e) => {
            report["error"] = json!({ "kind": e.kind(), "message": e.to_string() });
            e.exit_code()
        }
    };
    let mut text = serde_json::to_string_pretty(&report).expect("serializable");
    text.push('\n');
    Outcome { code, report: text }
}

/// Runs and writes the report to the configured destination.
pub fn run_and_write(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let out = run(cfg);
    match &cfg.output {
        Some(path) => std::fs::write(path, &out.report).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{}", out.report),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[test]
    fn error_envelope() {
        let cfg = RunConfig::try_parse_from(["quadrifold", "invariants", "/no/such/file.json"]).unwrap();
        let out = run(&cfg);
        assert_eq!(out.code, 1);
        let v = out.json();
        assert_eq!(v["error"]["kind"], "malformed-input");
        assert!(v["invariants"].is_null() && v.get("result").is_none());
        assert!(out.report.ends_with('\n'));
    }
}
