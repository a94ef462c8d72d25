use rayon::prelude::*;
use serde::Serialize;

use crate::chi::{chi_d, DEFAULT_TOLERANCE};
use crate::environment::StratifiedEnvironment;
use crate::flux::direction_grid;
use crate::sequences::SequenceSet;

use super::series::SeriesContext;
use super::CriterionError;

/// Both integrands at one radius t, each already multiplied by t^{d−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrandNode {
    pub t: f64,
    /// ∫ Re(1/(1 − χ_D(ut))) du · t^{d−1}.
    pub cf: f64,
    /// ∫ (φ_u^{-1}(1/t))²/φ_{u,+}^{-1}(1/t) du · t^{d−1}.
    pub analytic: f64,
    pub ratio: f64,
    /// Integral of `cf` from t to the largest grid radius.
    pub cf_partial: f64,
    pub analytic_partial: f64,
    /// Largest χ tail bound over the directions.
    pub tail_bound: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChungFuchs {
    /// Sorted by increasing t.
    pub nodes: Vec<IntegrandNode>,
    /// ∫ over [t_min, t_max] of each integrand.
    pub cf_integral: f64,
    pub analytic_integral: f64,
    /// max/min of cf/analytic over the grid.
    pub band_ratio: f64,
}

/// Both integrands in one direction at one radius, each times t^{d−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrandRow {
    pub theta: f64,
    pub weight: f64,
    pub t: f64,
    pub analytic: f64,
    pub chung_fuchs: f64,
    pub tail_bound: f64,
    pub converged: bool,
}

fn sorted_grid(t_grid: &[f64], limit: f64) -> Result<Vec<f64>, CriterionError> {
    let mut ts: Vec<f64> = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let Some(&t_min) = ts.first() else {
        return Err(CriterionError::Precondition("empty t grid".into()));
    };
    if !(t_min > 0.0) || ts[ts.len() - 1] > limit {
        return Err(CriterionError::Precondition(format!(
            "t grid must lie in (0, {limit}]"
        )));
    }
    Ok(ts)
}

/// Rows ordered by t, then by quadrature node.
fn rows_on(
    env: &StratifiedEnvironment,
    ts: &[f64],
    theta_nodes: usize,
    limit: f64,
) -> Result<Vec<IntegrandRow>, CriterionError> {
    if env.is_horizontally_degenerate() {
        return Err(CriterionError::Precondition(
            "every horizontal law is degenerate, so χ_D ≡ 1".into(),
        ));
    }
    let dim = env.dim();
    let mut seq = SequenceSet::new(env)?;
    let ctx = SeriesContext::new(&mut seq, 1.0 / ts[0], theta_nodes)?;
    let nodes = direction_grid(dim, theta_nodes)?;
    let seq = ctx.sequences().clone();
    let per_t: Vec<Vec<IntegrandRow>> = ts
        .par_iter()
        .map(|&t| {
            let mut seq = seq.clone();
            let scale = t.powi(dim as i32 - 1);
            let inverses = ctx.inverses(1.0 / t)?;
            nodes
                .iter()
                .zip(inverses)
                .map(|(node, inv)| {
                    let chi = chi_d(&mut seq, &node.direction, t, DEFAULT_TOLERANCE, limit)?;
                    Ok(IntegrandRow {
                        theta: node.theta,
                        weight: node.weight,
                        t,
                        analytic: inv.integrand() * scale,
                        chung_fuchs: (1.0 / (1.0 - chi.chi)).re * scale,
                        tail_bound: chi.tail_bound,
                        converged: chi.converged,
                    })
                })
                .collect()
        })
        .collect::<Result<_, CriterionError>>()?;
    Ok(per_t.into_iter().flatten().collect())
}

/// Both integrands per direction over the t-grid, for band inspection.
pub fn directional_integrands(
    env: &StratifiedEnvironment,
    t_grid: &[f64],
    theta_nodes: usize,
    limit: f64,
) -> Result<Vec<IntegrandRow>, CriterionError> {
    rows_on(env, &sorted_grid(t_grid, limit)?, theta_nodes, limit)
}

/// Integrates Re(1/(1 − χ_D(ut))) t^{d−1} and the φ-inverse integrand over
/// the t-grid (trapezoid in log t) and the direction quadrature.
pub fn chung_fuchs_integral(
    env: &StratifiedEnvironment,
    t_grid: &[f64],
    theta_nodes: usize,
    limit: f64,
) -> Result<ChungFuchs, CriterionError> {
    let ts = sorted_grid(t_grid, limit)?;
    let rows = rows_on(env, &ts, theta_nodes, limit)?;
    let per_t = rows.len() / ts.len();
    let raw: Vec<(f64, f64, f64, bool)> = rows
        .chunks(per_t)
        .map(|chunk| {
            chunk.iter().fold((0.0, 0.0, 0.0f64, true), |(cf, an, tail, ok), r| {
                (
                    cf + r.weight * r.chung_fuchs,
                    an + r.weight * r.analytic,
                    tail.max(r.tail_bound),
                    ok && r.converged,
                )
            })
        })
        .collect();
    let mut out: Vec<IntegrandNode> = ts
        .iter()
        .zip(&raw)
        .map(|(&t, &(cf, analytic, tail_bound, converged))| IntegrandNode {
            t,
            cf,
            analytic,
            ratio: cf / analytic,
            cf_partial: 0.0,
            analytic_partial: 0.0,
            tail_bound,
            converged,
        })
        .collect();
    for i in (0..out.len().saturating_sub(1)).rev() {
        let (lo, hi) = (out[i], out[i + 1]);
        let step = (hi.t / lo.t).ln();
        out[i].cf_partial = hi.cf_partial + 0.5 * (lo.cf * lo.t + hi.cf * hi.t) * step;
        out[i].analytic_partial =
            hi.analytic_partial + 0.5 * (lo.analytic * lo.t + hi.analytic * hi.t) * step;
    }
    let ratios = out.iter().map(|n| n.ratio).filter(|r| r.is_finite() && *r > 0.0);
    let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
    Ok(ChungFuchs {
        cf_integral: out[0].cf_partial,
        analytic_integral: out[0].analytic_partial,
        band_ratio: hi / lo,
        nodes: out,
    })
}
