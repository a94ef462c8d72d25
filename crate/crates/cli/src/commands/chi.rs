use serde_json::json;
use strata_core::chi::{chi_d, DEFAULT_TOLERANCE, DEFAULT_T_LIMIT};
use strata_core::flux::Direction;
use strata_core::montecarlo::{empirical_chf, sample_d, truncation_bias_bound};
use strata_core::sequences::SequenceSet;

use crate::args::Cli;
use crate::config::{load, require_valid};
use crate::error::CliError;
use crate::output::{num, Output, Table};

const DEFAULT_T: [f64; 3] = [0.1, 0.2, 0.5];

pub fn run(
    cli: &Cli,
    t: &[f64],
    samples: u64,
    cap: u64,
    theta: Option<f64>,
    out: &mut Output,
) -> Result<u8, CliError> {
    let loaded = load(cli)?;
    require_valid(cli, &loaded.config, &loaded.env)?;
    let env = &loaded.env;
    let ts = if t.is_empty() && cli.t_min.is_none() && cli.t_max.is_none() && cli.t_points.is_none() {
        DEFAULT_T.to_vec()
    } else {
        cli.t_grid(t, (0.1, DEFAULT_T_LIMIT, 3))
    };
    if let Some(&bad) = ts.iter().find(|&&t| !(0.0..=DEFAULT_T_LIMIT).contains(&t)) {
        return Err(CliError::Usage(format!("t = {bad} outside [0, {DEFAULT_T_LIMIT}]")));
    }
    let u = match theta {
        Some(theta) => Direction::planar(theta).map_err(|e| CliError::Usage(e.to_string()))?,
        None => Direction::axis(env.dim()),
    };
    if u.dim() != env.dim() {
        return Err(CliError::Usage(format!("--theta needs d = 2, config has d = {}", env.dim())));
    }

    let mut seq = SequenceSet::new(env).map_err(CliError::domain)?;
    let batch = sample_d(env, cli.seed, samples, cap).map_err(CliError::domain)?;
    let bias = truncation_bias_bound(&batch);
    eprintln!(
        "{} excursions, {} truncated at {cap} steps, bias bound {}",
        batch.samples.len(),
        batch.truncated,
        num(bias)
    );

    let mut table = Table::new(&[
        "t",
        "cf_re",
        "cf_im",
        "mc_re",
        "mc_im",
        "stderr",
        "tail_bound",
        "bias_bound",
        "gap",
        "allowed",
        "within",
        "truncation_flagged",
    ]);
    let mut all_within = true;
    for &t in &ts {
        let cf = chi_d(&mut seq, &u, t, DEFAULT_TOLERANCE, DEFAULT_T_LIMIT).map_err(CliError::domain)?;
        let mc = empirical_chf(&batch.samples, u.coords(), t).map_err(CliError::domain)?;
        let gap = (cf.chi - mc.value).norm();
        let allowed = 3.0 * mc.stderr + cf.tail_bound + bias;
        let within = gap <= allowed;
        all_within &= within;
        table.push(vec![
            t.into(),
            cf.chi.re.into(),
            cf.chi.im.into(),
            mc.value.re.into(),
            mc.value.im.into(),
            mc.stderr.into(),
            cf.tail_bound.into(),
            bias.into(),
            gap.into(),
            allowed.into(),
            within.into(),
            (batch.truncated > 0).into(),
        ]);
    }
    out.table("chi_compare", &table)?;
    out.summary(
        "chi_compare",
        &json!({
            "direction": u.coords(),
            "samples": batch.samples.len(),
            "truncated": batch.truncated,
            "cap": cap,
            "truncated_fraction": batch.truncated_fraction(),
            "bias_bound": bias,
            "all_within": all_within,
        }),
    )?;
    if !all_within {
        eprintln!("some rows exceed 3·stderr + tail + bias");
    }
    Ok(if all_within { 0 } else { 1 })
}
