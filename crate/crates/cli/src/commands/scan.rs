use serde_json::{json, Value};
use strata_core::criterion::classify;

use super::classify::options;
use crate::args::Cli;
use crate::config::{build, config_path, read_document, require_valid};
use crate::error::CliError;
use crate::output::{Cell, Output, Table};

/// `steps` evenly spaced values on [from, to]; empty when steps = 0 or to < from.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        _ if to < from => Vec::new(),
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    to
                } else {
                    from + i as f64 * (to - from) / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

/// Copy of `doc` with the field `param` set to `x`. A bare name refers to
/// the family object first, then the document root; dots separate a path.
pub fn patch(doc: &Value, param: &str, x: f64) -> Result<Value, CliError> {
    let mut doc = doc.clone();
    let pointer = if param.contains('.') {
        format!("/{}", param.replace('.', "/"))
    } else if doc.pointer(&format!("/family/{param}")).is_some() {
        format!("/family/{param}")
    } else {
        format!("/{param}")
    };
    let slot = doc
        .pointer_mut(&pointer)
        .ok_or_else(|| CliError::Usage(format!("config has no field {param}")))?;
    *slot = if slot.is_i64() || slot.is_u64() {
        if x.fract() != 0.0 {
            return Err(CliError::Usage(format!("{param} is an integer field, got {x}")));
        }
        json!(x as i64)
    } else if slot.is_number() {
        json!(x)
    } else {
        return Err(CliError::Usage(format!("{param} is not a numeric field")));
    };
    Ok(doc)
}

pub fn run(
    cli: &Cli,
    param: &str,
    (from, to, steps): (Option<f64>, Option<f64>, usize),
    values: &[f64],
    out: &mut Output,
) -> Result<u8, CliError> {
    let doc = read_document(config_path(cli)?)?;
    let values = if !values.is_empty() {
        values.to_vec()
    } else {
        match (from, to) {
            (Some(a), Some(b)) => linspace(a, b, steps),
            (None, None) if steps == 0 => Vec::new(),
            _ => return Err(CliError::Usage("--from, --to and --steps go together".into())),
        }
    };
    let options = options(cli);
    let mut table = Table::new(&["parameter", "verdict", "rule", "fitted_exponent"]);
    for x in values {
        let patched = patch(&doc, param, x)?;
        let row: Vec<Cell> = match build(&patched).and_then(|(config, env)| {
            require_valid(cli, &config, &env)?;
            classify(&env, &options).map_err(CliError::domain)
        }) {
            Ok(c) => {
                eprintln!("{param} = {x}: {c}");
                let slope = c.diagnostics.as_ref().and_then(|d| d.fit).map_or(f64::NAN, |f| f.slope);
                vec![x.into(), c.verdict.to_string().into(), c.rule.label().to_string().into(), slope.into()]
            }
            Err(e) => {
                eprintln!("{param} = {x}: rejected: {e}");
                vec![x.into(), "Rejected".to_string().into(), e.to_string().into(), f64::NAN.into()]
            }
        };
        table.push(row);
    }
    out.table("scan", &table)?;
    Ok(0)
}
