use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use strata_core::environment::{validate, EnvironmentConfig, StratifiedEnvironment};

use crate::args::Cli;
use crate::error::CliError;

pub struct Loaded {
    pub path: PathBuf,
    pub config: EnvironmentConfig,
    pub env: StratifiedEnvironment,
}

pub fn config_path(cli: &Cli) -> Result<&Path, CliError> {
    cli.config
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("{} needs --config", cli.command.name())))
}

pub fn read_document(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn build(doc: &Value) -> Result<(EnvironmentConfig, StratifiedEnvironment), CliError> {
    let config = EnvironmentConfig::from_json(&doc.to_string())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let env = config.build().map_err(|e| CliError::Config(e.to_string()))?;
    Ok((config, env))
}

pub fn load(cli: &Cli) -> Result<Loaded, CliError> {
    let path = config_path(cli)?.to_path_buf();
    let (config, env) = build(&read_document(&path)?)?;
    Ok(Loaded { path, config, env })
}

/// Refuses environments that fail the hypotheses on the config's own window.
pub fn require_valid(cli: &Cli, config: &EnvironmentConfig, env: &StratifiedEnvironment) -> Result<(), CliError> {
    if cli.skip_validation {
        return Ok(());
    }
    let (lo, hi) = config.validation_window();
    let report = validate(env, lo, hi).map_err(|e| CliError::Config(e.to_string()))?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Domain(format!(
            "environment fails the standing hypotheses on [{lo}, {hi}]: {} (use --skip-validation to run anyway)",
            report.summary()
        )))
    }
}
