use rayon::prelude::*;
use serde::Serialize;

use crate::environment::StratifiedEnvironment;
use crate::flux::{direction_grid, phi, phi_inverse, prepare, DirectionNode, FluxProfile, PhiVariant, Prepared};
use crate::sequences::{SequenceSet, Series, Side};

use super::{Classification, ClassifyOptions, CriterionError, Rule, Verdict};

/// Ordinary least-squares fit of log y against log x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub points: usize,
}

impl Fit {
    /// Slope ± two standard errors.
    pub fn interval(&self) -> (f64, f64) {
        (self.slope - 2.0 * self.stderr, self.slope + 2.0 * self.stderr)
    }
}

/// Fit over the pairs with x, y > 0; `None` with fewer than three.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Option<Fit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let k = pts.len();
    if k < 3 {
        return None;
    }
    let kf = k as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Some(Fit {
        slope,
        intercept,
        stderr: (rss / (kf - 2.0) / sxx).sqrt(),
        points: k,
    })
}

/// Divergence of Σ a_n iff the decay exponent is at least −1.
pub(crate) fn fit_verdict(fit: &Fit, margin: f64) -> Verdict {
    let (lo, hi) = fit.interval();
    if lo > -1.0 + margin {
        Verdict::Recurrent
    } else if hi < -1.0 - margin {
        Verdict::Transient
    } else {
        Verdict::Inconclusive
    }
}

/// `points` log-spaced integers on [max(10, n_max/1000), n_max].
pub fn log_grid(n_max: u64, points: usize) -> Vec<u64> {
    let hi = n_max.max(1);
    let lo = (hi / 1000).max(10).min(hi);
    let (llo, lhi) = ((lo as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<u64> = (0..points)
        .map(|i| {
            let s = if points > 1 { i as f64 / (points - 1) as f64 } else { 1.0 };
            ((llo + s * (lhi - llo)).exp().round() as u64).clamp(lo, hi)
        })
        .collect();
    grid.dedup();
    grid
}

/// Both φ inverses in one quadrature direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionInverse {
    pub theta: f64,
    pub weight: f64,
    pub full: f64,
    pub plus: f64,
}

impl DirectionInverse {
    /// full²/plus, with 0/0 read as 0.
    pub fn integrand(&self) -> f64 {
        if self.plus > 0.0 {
            self.full * self.full / self.plus
        } else {
            0.0
        }
    }
}

/// Snapshot of the sequences and one flux profile per quadrature node,
/// enough to evaluate every φ inverse at arguments up to `x_max`.
pub struct SeriesContext {
    seq: SequenceSet,
    dim: usize,
    nodes: Vec<DirectionNode>,
    profiles: Vec<FluxProfile>,
    pub prepared: Prepared,
}

impl SeriesContext {
    pub fn new(seq: &mut SequenceSet, x_max: f64, theta_nodes: usize) -> Result<Self, CriterionError> {
        let prepared = prepare(seq, x_max, &[PhiVariant::Full, PhiVariant::Plus])?;
        let dim = seq.env().dim();
        let nodes = direction_grid(dim, theta_nodes)?;
        let profiles = nodes
            .par_iter()
            .map(|node| FluxProfile::build(seq, node.direction))
            .collect();
        Ok(Self {
            seq: seq.clone(),
            dim,
            nodes,
            profiles,
            prepared,
        })
    }

    fn inverse(&self, profile: &FluxProfile, variant: PhiVariant, x: f64) -> Result<f64, CriterionError> {
        match phi_inverse(&self.seq, profile, variant, x).certified()? {
            Some(k) => Ok(k as f64),
            None => Err(CriterionError::Saturated { x }),
        }
    }

    /// φ_u^{-1}(x) and φ_{u,+}^{-1}(x) at every quadrature node.
    pub fn inverses(&self, x: f64) -> Result<Vec<DirectionInverse>, CriterionError> {
        self.nodes
            .iter()
            .zip(&self.profiles)
            .map(|(node, profile)| {
                Ok(DirectionInverse {
                    theta: node.theta,
                    weight: node.weight,
                    full: self.inverse(profile, PhiVariant::Full, x)?,
                    plus: self.inverse(profile, PhiVariant::Plus, x)?,
                })
            })
            .collect()
    }

    /// Σ_u w_u (φ_u^{-1}(x))²/φ_{u,+}^{-1}(x), with 0/0 read as 0.
    pub fn integrand(&self, x: f64) -> Result<f64, CriterionError> {
        Ok(self
            .inverses(x)?
            .iter()
            .map(|inv| inv.weight * inv.integrand())
            .sum())
    }

    /// a_n = n^{−d−1} times the integrand at n.
    pub fn term(&self, n: u64) -> Result<f64, CriterionError> {
        let x = n as f64;
        Ok(self.integrand(x)? * x.powi(-(self.dim as i32) - 1))
    }

    /// Terms on a grid, evaluated in parallel and returned in grid order.
    pub fn terms(&self, grid: &[u64]) -> Result<Vec<f64>, CriterionError> {
        grid.par_iter().map(|&n| self.term(n)).collect()
    }

    pub fn sequences(&self) -> &SequenceSet {
        &self.seq
    }
}

/// a_n for one n.
pub fn criterion_term(env: &StratifiedEnvironment, n: u64, theta_nodes: usize) -> Result<f64, CriterionError> {
    if n == 0 {
        return Err(CriterionError::Precondition("n must be at least 1".into()));
    }
    let mut seq = SequenceSet::new(env)?;
    SeriesContext::new(&mut seq, n as f64, theta_nodes)?.term(n)
}

/// One row of the diagnostic table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub n: u64,
    pub a_n: f64,
    /// Trapezoid estimate of Σ a_k over the grid up to n.
    pub partial_sum: f64,
    /// Local slope of log a_n against log n.
    pub fitted_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesDiagnostics {
    pub terms: Vec<SeriesTerm>,
    pub fit: Option<Fit>,
    pub margin: f64,
    /// Largest relative gap between the θ-rule and its doubled version (d = 2).
    pub quadrature_gap: Option<f64>,
}

fn rows(grid: &[u64], a: &[f64]) -> Vec<SeriesTerm> {
    let logs: Vec<(f64, f64)> = grid.iter().zip(a).map(|(&n, &v)| ((n as f64).ln(), v.ln())).collect();
    let mut partial = 0.0;
    (0..grid.len())
        .map(|i| {
            if i > 0 {
                let (n0, n1) = (grid[i - 1] as f64, grid[i] as f64);
                partial += 0.5 * (a[i - 1] * n0 + a[i] * n1) * (n1 / n0).ln();
            }
            let (j, k) = (i.saturating_sub(1), (i + 1).min(grid.len() - 1));
            let fitted_slope = if j == k {
                f64::NAN
            } else {
                (logs[k].1 - logs[j].1) / (logs[k].0 - logs[j].0)
            };
            SeriesTerm {
                n: grid[i],
                a_n: a[i],
                partial_sum: partial,
                fitted_slope,
            }
        })
        .collect()
}

/// Slope fit of the main criterion series on the log grid.
pub fn series_diagnostic(seq: &mut SequenceSet, options: &ClassifyOptions) -> Result<Classification, CriterionError> {
    let grid = log_grid(options.n_max, options.points);
    let x_max = options.n_max as f64;
    let a = SeriesContext::new(seq, x_max, options.theta_nodes)?.terms(&grid)?;
    let quadrature_gap = if seq.env().dim() == 2 {
        let fine = SeriesContext::new(seq, x_max, 2 * options.theta_nodes)?.terms(&grid)?;
        let gap = a
            .iter()
            .zip(&fine)
            .map(|(c, f)| if *f == 0.0 { (c - f).abs() } else { ((c - f) / f).abs() })
            .fold(0.0, f64::max);
        Some(gap)
    } else {
        None
    };
    let xs: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let fit = log_log_fit(&xs, &a);
    let diagnostics = SeriesDiagnostics {
        terms: rows(&grid, &a),
        fit,
        margin: options.margin,
        quadrature_gap,
    };
    let (verdict, detail) = match (fit, quadrature_gap) {
        (_, Some(gap)) if gap > options.quadrature_tolerance => (
            Verdict::Inconclusive,
            format!("θ-rule doubling moved the terms by {:.2}%", 100.0 * gap),
        ),
        (None, _) => (Verdict::Inconclusive, "fewer than three positive terms".into()),
        (Some(fit), _) => (
            fit_verdict(&fit, options.margin),
            format!(
                "slope {:.4} ± {:.4} (two standard errors), margin {}",
                fit.slope,
                2.0 * fit.stderr,
                options.margin
            ),
        ),
    };
    Ok(Classification {
        verdict,
        rule: Rule::SeriesDiagnostic,
        detail,
        diagnostics: Some(diagnostics),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sufficiency {
    Transient,
    NoConclusion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransienceReport {
    pub verdict: Sufficiency,
    /// Fit of ∫ φ_u(n)^{-d} du.
    pub phi_fit: Option<Fit>,
    /// Fit of ψ(n)^{-d}.
    pub psi_fit: Option<Fit>,
    /// Exponent slack ε of the growth condition.
    pub epsilon: f64,
    /// w_+∘v_+^{-1}(n) + w_−∘v_−^{-1}(n) ≥ (log n)^{1+ε} (d = 2) or
    /// n (log n)^{2+ε} (d = 1) at every grid point.
    pub growth_holds: bool,
}

impl TransienceReport {
    pub fn detail(&self) -> String {
        let show = |f: &Option<Fit>| match f {
            Some(f) => format!("{:.4} ± {:.4}", f.slope, 2.0 * f.stderr),
            None => "n/a".into(),
        };
        format!(
            "slope of ∫ φ_u^(-d): {}, of ψ^(-d): {}, growth condition (ε = {}): {}",
            show(&self.phi_fit),
            show(&self.psi_fit),
            self.epsilon,
            self.growth_holds
        )
    }
}

/// Growth slack used by [`transience_sufficient`].
pub const GROWTH_EPSILON: f64 = 0.1;

fn vertical_spread(seq: &mut SequenceSet, n: u64) -> Result<f64, CriterionError> {
    let mut total = 0.0;
    for side in [Side::Plus, Side::Minus] {
        match seq.inverse(Series::v(side), n as f64).certified()? {
            Some(k) => total += seq.value(Series::w(side), k)?,
            None => return Ok(f64::INFINITY),
        }
    }
    Ok(total)
}

/// The sufficient conditions for transience: summable ∫ φ_u^{-d}, summable
/// ψ^{-d}, and the growth of w∘v^{-1} on the grid.
pub fn transience_sufficient(seq: &mut SequenceSet, options: &ClassifyOptions) -> Result<TransienceReport, CriterionError> {
    let dim = seq.env().dim();
    let grid = log_grid(options.n_max, options.points);
    let n_max = *grid.last().unwrap_or(&1);
    for side in [Side::Plus, Side::Minus] {
        if let Some(k) = seq.inverse(Series::v(side), n_max as f64).certified()? {
            seq.ensure(side, k as usize + 1)?;
        }
    }
    let nodes = direction_grid(dim, options.theta_nodes)?;
    let profiles: Vec<_> = nodes
        .iter()
        .map(|node| FluxProfile::build(seq, node.direction))
        .collect();
    let xs: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let mut phi_terms = Vec::with_capacity(grid.len());
    let mut psi_terms = Vec::with_capacity(grid.len());
    let mut growth_holds = true;
    for &n in &grid {
        let mut sum = 0.0;
        for (node, profile) in nodes.iter().zip(&profiles) {
            sum += node.weight * phi(seq, profile, PhiVariant::Full, n)?.powi(-(dim as i32));
        }
        phi_terms.push(sum);
        psi_terms.push(seq.psi(n)?.powi(-(dim as i32)));
        let log_n = (n as f64).ln();
        let needed = match dim {
            1 => n as f64 * log_n.powf(2.0 + GROWTH_EPSILON),
            _ => log_n.powf(1.0 + GROWTH_EPSILON),
        };
        growth_holds &= vertical_spread(seq, n)? >= needed;
    }
    let phi_fit = log_log_fit(&xs, &phi_terms);
    let psi_fit = log_log_fit(&xs, &psi_terms);
    let summable = |f: &Option<Fit>| f.is_some_and(|f| fit_verdict(&f, options.margin) == Verdict::Transient);
    let verdict = if summable(&phi_fit) || summable(&psi_fit) {
        Sufficiency::Transient
    } else {
        Sufficiency::NoConclusion
    };
    Ok(TransienceReport {
        verdict,
        phi_fit,
        psi_fit,
        epsilon: GROWTH_EPSILON,
        growth_holds,
    })
}
