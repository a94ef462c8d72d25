use strata_core::chi::DEFAULT_T_LIMIT;
use strata_core::criterion::{directional_integrands, log_grid};
use strata_core::flux::{direction_grid, phi, FluxProfile, PhiVariant};
use strata_core::sequences::{Series, SequenceSet, Side};

use super::classify::{diagnostics, options, terms_table};
use crate::args::{Cli, CurveKind};
use crate::config::{load, require_valid};
use crate::error::CliError;
use crate::output::{Output, Table};

pub fn run(cli: &Cli, which: CurveKind, out: &mut Output) -> Result<u8, CliError> {
    let loaded = load(cli)?;
    require_valid(cli, &loaded.config, &loaded.env)?;
    let env = &loaded.env;
    let table = match which {
        CurveKind::Psi => psi_table(&mut SequenceSet::new(env).map_err(CliError::domain)?, cli)?,
        CurveKind::Phi => phi_table(&mut SequenceSet::new(env).map_err(CliError::domain)?, cli)?,
        CurveKind::CriterionTerms => terms_table(&diagnostics(env, &options(cli))?.terms),
        CurveKind::Integrand => {
            let ts = cli.t_grid(&[], (1e-3, 1e-1, 20));
            let rows = directional_integrands(env, &ts, cli.theta_nodes, DEFAULT_T_LIMIT)
                .map_err(CliError::domain)?;
            let mut table = Table::new(&[
                "theta",
                "t",
                "analytic",
                "chung_fuchs",
                "ratio",
                "tail_bound",
                "converged",
            ]);
            for r in rows {
                table.push(vec![
                    r.theta.into(),
                    r.t.into(),
                    r.analytic.into(),
                    r.chung_fuchs.into(),
                    (r.chung_fuchs / r.analytic).into(),
                    r.tail_bound.into(),
                    r.converged.into(),
                ]);
            }
            table
        }
    };
    out.table(which.stem(), &table)?;
    Ok(0)
}

fn psi_table(seq: &mut SequenceSet, cli: &Cli) -> Result<Table, CliError> {
    let mut table = Table::new(&["n", "psi", "psi_plus", "psi_minus"]);
    for n in log_grid(cli.n_max, cli.points) {
        table.push(vec![
            n.into(),
            seq.psi(n).map_err(CliError::domain)?.into(),
            seq.psi_plus(n).map_err(CliError::domain)?.into(),
            seq.psi_minus(n).map_err(CliError::domain)?.into(),
        ]);
    }
    Ok(table)
}

fn phi_table(seq: &mut SequenceSet, cli: &Cli) -> Result<Table, CliError> {
    for side in [Side::Plus, Side::Minus] {
        seq.supremum_bound(Series::v(side));
        seq.supremum_bound(Series::w(side));
        if let Some(k) = seq
            .inverse(Series::v(side), cli.n_max as f64)
            .certified()
            .map_err(CliError::domain)?
        {
            let levels = usize::try_from(k + 1).map_err(CliError::domain)?;
            seq.ensure(side, levels).map_err(CliError::domain)?;
        }
    }
    let nodes = direction_grid(seq.env().dim(), cli.theta_nodes).map_err(CliError::domain)?;
    let grid = log_grid(cli.n_max, cli.points);
    let mut table = Table::new(&["n", "theta", "phi", "phi_plus", "phi_plus_plus", "phi_plus_minus"]);
    for node in nodes {
        let profile = FluxProfile::build(seq, node.direction);
        for &n in &grid {
            let mut row = vec![n.into(), node.theta.into()];
            for variant in PhiVariant::ALL {
                row.push(phi(seq, &profile, variant, n).map_err(CliError::domain)?.into());
            }
            table.push(row);
        }
    }
    Ok(table)
}
