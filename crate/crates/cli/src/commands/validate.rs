use std::io::Write;

use strata_core::environment::validate;

use crate::args::Cli;
use crate::config::load;
use crate::error::CliError;
use crate::output::{num, Output};

pub fn run(cli: &Cli, lo: Option<i64>, hi: Option<i64>, out: &mut Output) -> Result<u8, CliError> {
    let loaded = load(cli)?;
    let (dlo, dhi) = loaded.config.validation_window();
    let (lo, hi) = (lo.unwrap_or(dlo), hi.unwrap_or(dhi));
    let report = validate(&loaded.env, lo, hi).map_err(|e| CliError::Config(e.to_string()))?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{}: n in [{lo}, {hi}], delta = {}", loaded.path.display(), loaded.config.delta)?;
    for (name, c) in [
        ("condition 1 (min p,q,r)", &report.condition1),
        ("condition 2 (moment)", &report.condition2),
        ("condition 3 (eigenvalue)", &report.condition3),
    ] {
        let status = if c.ok { "ok" } else { "FAIL" };
        writeln!(stdout, "{name}: {status}, worst n = {}, margin {}", c.worst_level, num(c.margin))?;
    }
    writeln!(stdout, "second-moment matrix full rank: {}", report.group_full_rank)?;
    writeln!(stdout, "{}", report.summary())?;
    out.summary("validate", &report)?;
    Ok(if report.passed() { 0 } else { 1 })
}
