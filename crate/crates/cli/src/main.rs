use std::process::ExitCode;

use clap::Parser;

use paretotopo_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .downcast_ref::<paretotopo::Error>()
                .map(paretotopo_cli::commands::error_kind)
                .unwrap_or("io");
            let message = format!("{e:#}");
            let body = serde_json::json!({ "error": { "kind": kind, "message": message } });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
