mod chi;
mod classify;
mod curve;
mod scan;
mod validate;

use crate::args::{Cli, Command};
use crate::error::CliError;
use crate::output::Output;

/// Runs the subcommand and returns its exit code.
pub fn dispatch(cli: &Cli, out: &mut Output) -> Result<u8, CliError> {
    match &cli.command {
        Command::Validate { lo, hi } => validate::run(cli, *lo, *hi, out),
        Command::Classify => classify::run(cli, out),
        Command::ChiCompare {
            t,
            samples,
            cap,
            theta,
        } => chi::run(cli, t, *samples, *cap, *theta, out),
        Command::Scan {
            param,
            from,
            to,
            steps,
            values,
        } => scan::run(cli, param, (*from, *to, *steps), values, out),
        Command::Curve { which } => curve::run(cli, *which, out),
    }
}
