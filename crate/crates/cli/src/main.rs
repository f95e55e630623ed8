use clap::error::ErrorKind;
use clap::Parser;

use quadrifold_cli::{run_and_write, RunConfig};

fn main() {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    match run_and_write(&cfg) {
        Ok(out) => {
            if out.code != 0 {
                if let Some(msg) = out.json()["error"]["message"].as_str() {
                    eprintln!("quadrifold: {msg}");
                }
            }
            std::process::exit(out.code);
        }
        Err(e) => {
            eprintln!("quadrifold: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
