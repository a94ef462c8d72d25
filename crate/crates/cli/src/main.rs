mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::{json, Value};

use args::Cli;
use error::CliError;
use output::Output;

fn manifest_entry(cli: &Cli, started: Instant, code: u8) -> Value {
    let config = cli
        .config
        .as_deref()
        .and_then(|p| config::read_document(p).ok())
        .unwrap_or(Value::Null);
    let finished = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    json!({
        "command": cli.command.name(),
        "argv": std::env::args().collect::<Vec<_>>(),
        "config_path": cli.config,
        "config": config,
        "options": cli,
        "seed": cli.seed,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "exit_code": code,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
        "finished_unix": finished,
    })
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let started = Instant::now();
    let mut out = Output::new(cli.out.clone(), cli.format)?;
    let code = commands::dispatch(cli, &mut out)?;
    out.finish(manifest_entry(cli, started, code))?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Closed) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("strata: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
