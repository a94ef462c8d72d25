use std::io::Write;

use serde_json::json;
use strata_core::criterion::{classify, series_diagnostic, ClassifyOptions, SeriesDiagnostics, SeriesTerm};
use strata_core::environment::StratifiedEnvironment;
use strata_core::sequences::SequenceSet;

use crate::args::Cli;
use crate::config::{load, require_valid};
use crate::error::CliError;
use crate::output::{Output, Table};

pub fn options(cli: &Cli) -> ClassifyOptions {
    ClassifyOptions {
        n_max: cli.n_max,
        points: cli.points,
        margin: cli.margin,
        theta_nodes: cli.theta_nodes,
        ..ClassifyOptions::default()
    }
}

pub fn diagnostics(env: &StratifiedEnvironment, options: &ClassifyOptions) -> Result<SeriesDiagnostics, CliError> {
    let mut seq = SequenceSet::new(env).map_err(CliError::domain)?;
    series_diagnostic(&mut seq, options)
        .map_err(CliError::domain)?
        .diagnostics
        .ok_or_else(|| CliError::Domain("the series diagnostic produced no terms".into()))
}

pub fn terms_table(terms: &[SeriesTerm]) -> Table {
    let mut table = Table::new(&["n", "a_n", "partial_sum", "fitted_slope"]);
    for t in terms {
        table.push(vec![t.n.into(), t.a_n.into(), t.partial_sum.into(), t.fitted_slope.into()]);
    }
    table
}

pub fn run(cli: &Cli, out: &mut Output) -> Result<u8, CliError> {
    let loaded = load(cli)?;
    require_valid(cli, &loaded.config, &loaded.env)?;
    let options = options(cli);
    let c = classify(&loaded.env, &options).map_err(CliError::domain)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{c}")?;
    writeln!(stdout, "{}", c.detail)?;
    let fit = c.diagnostics.as_ref().and_then(|d| d.fit);
    if let Some(fit) = fit {
        writeln!(stdout, "fitted slope {:.4} ± {:.4} over {} points", fit.slope, fit.stderr, fit.points)?;
    }
    if out.is_saved() {
        let diag = match &c.diagnostics {
            Some(d) => Ok(d.clone()),
            None => diagnostics(&loaded.env, &options),
        };
        match diag {
            Ok(d) => out.table("diagnostics", &terms_table(&d.terms))?,
            Err(e) => eprintln!("no diagnostics table: {e}"),
        }
    }
    out.summary(
        "classify",
        &json!({
            "verdict": c.verdict.to_string(),
            "rule": c.rule.label(),
            "text": c.to_string(),
            "detail": c.detail,
            "fit": fit,
        }),
    )?;
    Ok(0)
}
