use num_complex::Complex64;
use serde::Serialize;

use crate::sequences::{SeqError, SequenceSet, Series, Side};

use super::{CfError, Convergents};

/// Default depth limit of walk fractions.
pub const DEFAULT_MAX_DEPTH: usize = 1_000_000;

/// Value of a walk fraction with its certified truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkFraction {
    pub value: Complex64,
    pub depth: usize,
    /// v(n)/|B_n|², which bounds |value − limit|.
    pub tail_bound: f64,
    /// Whether `tail_bound` reached the requested tolerance.
    pub converged: bool,
}

/// (c_k, d_k) of the walk fraction on one side at depth k ≥ 1:
/// c_1 = a_1, c_k = −a_k, d_k = b_k/γ_k.
pub fn walk_coefficients(
    seq: &mut SequenceSet,
    side: Side,
    k: usize,
    gamma: Complex64,
) -> Result<(Complex64, Complex64), CfError> {
    let a = seq.side_odds(side, k)?;
    let c = if k == 1 { a } else { -a };
    Ok((Complex64::new(c, 0.0), Complex64::new(1.0 + a, 0.0) / gamma))
}

fn check_weight(index: usize, value: Complex64) -> Result<(), CfError> {
    let m = value.norm();
    if m == 0.0 || m > 1.0 + 1e-12 || !m.is_finite() {
        return Err(CfError::Weight { index, value });
    }
    Ok(())
}

/// Evaluates [(a_1, b_1/γ_1); (−a_2, b_2/γ_2); …] on one side, stopping once
/// v(n)/|B_n|² ≤ `tol`. Refuses sides whose v is certified bounded.
pub fn evaluate_walk(
    seq: &mut SequenceSet,
    side: Side,
    mut gamma: impl FnMut(usize) -> Result<Complex64, CfError>,
    tol: f64,
    max_depth: usize,
) -> Result<WalkFraction, CfError> {
    if seq.supremum_bound(Series::v(side)).is_some() {
        return Err(CfError::BoundedVertical);
    }
    let mut conv = Convergents::new();
    let mut best = None;
    for k in 1..=max_depth.max(1) {
        let g = gamma(k)?;
        check_weight(k, g)?;
        let coeffs = match walk_coefficients(seq, side, k, g) {
            Ok(cd) => cd,
            Err(CfError::Seq(SeqError::Horizon { .. } | SeqError::Env(_))) if best.is_some() => break,
            Err(e) => return Err(e),
        };
        let pair = *conv.push(coeffs.0, coeffs.1)?;
        let v = seq.value(Series::v(side), k as u64)?;
        let tail_bound = (v.ln() - 2.0 * pair.log_abs_b()).exp();
        let result = WalkFraction {
            value: pair.value(),
            depth: k,
            tail_bound,
            converged: tail_bound <= tol,
        };
        if result.converged {
            return Ok(result);
        }
        best = Some(result);
    }
    Ok(best.expect("at least one level"))
}

/// E^+ Π_{k=1}^{σ−1} γ_{Y_k} for the excursion above level 0 (or below, on
/// the minus side), as the walk fraction with weights γ.
pub fn weighted_excursion_gf(
    seq: &mut SequenceSet,
    side: Side,
    gamma: impl FnMut(usize) -> Result<Complex64, CfError>,
    tol: f64,
) -> Result<WalkFraction, CfError> {
    evaluate_walk(seq, side, gamma, tol, DEFAULT_MAX_DEPTH)
}

/// E(s^{Z_n}) for the Galton–Watson process of a positive excursion:
/// [(a_1, b_1); (−a_2, b_2); …; (−a_{n−1}, b_{n−1} − s)].
pub fn gw_gf(seq: &mut SequenceSet, side: Side, s: f64, n: usize) -> Result<f64, CfError> {
    if n < 2 {
        return Err(CfError::Depth { min: 2, got: n });
    }
    let mut z = s;
    for k in (1..n).rev() {
        let a = seq.side_odds(side, k)?;
        z = a / (1.0 + a - z);
    }
    Ok(z)
}

/// Limit of P(Z_n = 0) with the depth used and a certified error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extinction {
    pub value: f64,
    pub depth: usize,
    pub tail_bound: f64,
}

/// Extinction probability lim_n P(Z_n = 0), deepening until the bound is
/// below `tol`.
///
/// P(Z_n = 0) = 1 − 1/v(n−1) increases to 1 − 1/v(∞), so the error at depth n
/// is at most 1/v(n−1) − 1/V for any certified V ≥ v(∞) (V = ∞ when v diverges).
pub fn gw_extinction(
    seq: &mut SequenceSet,
    side: Side,
    tol: f64,
    max_depth: usize,
) -> Result<Extinction, CfError> {
    let sup = seq.supremum_bound(Series::v(side));
    let floor = sup.map_or(0.0, |b| 1.0 / b);
    let mut n = 2;
    loop {
        let v = seq.value(Series::v(side), (n - 1) as u64)?;
        let tail_bound = (1.0 / v - floor).max(0.0);
        if tail_bound < tol || n >= max_depth {
            return Ok(Extinction {
                value: gw_gf(seq, side, 0.0, n)?,
                depth: n,
                tail_bound,
            });
        }
        n = (n * 2).min(max_depth);
    }
}
