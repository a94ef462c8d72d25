//! Exact t-polynomial coefficients of the squared moduli and cross terms of
//! the walk convergents with weights ψ, and a double-double direct oracle.

mod oracle;

use serde::Serialize;
use thiserror::Error;

use crate::flux::Direction;
use crate::sequences::{SeqError, SequenceSet, Side};

pub use oracle::{verify_against_direct, DirectValues, Identity, Verification, MAX_ORACLE_DEPTH};

/// Largest depth handled by the exact tables.
pub const MAX_EXACT_DEPTH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpansionError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("depth {got} exceeds the limit {max}")]
    Depth { max: usize, got: usize },
}

/// Plus-side data on levels 0..=n: ρ, odds, projected drift and the
/// window sums R_k^l for 1 ≤ k ≤ l ≤ n.
#[derive(Debug, Clone)]
pub(crate) struct Window {
    pub n: usize,
    pub log_rho: Vec<f64>,
    pub odds: Vec<f64>,
    pub drift: Vec<f64>,
    /// `flux[k][l]` = R_k^l, zero below the diagonal.
    pub flux: Vec<Vec<f64>>,
}

impl Window {
    pub fn load(seq: &mut SequenceSet, u: &Direction, n: usize) -> Result<Self, SeqError> {
        seq.ensure(Side::Plus, n)?;
        let mut log_rho = Vec::with_capacity(n + 1);
        let mut odds = Vec::with_capacity(n + 1);
        let mut drift = Vec::with_capacity(n + 1);
        for k in 0..=n {
            log_rho.push(seq.log_rho(k as i64)?);
            odds.push(seq.odds(k as i64)?);
            drift.push(u.dot(&seq.drift(k as i64)?));
        }
        let mut flux = vec![vec![0.0; n + 1]; n + 1];
        for k in 1..=n {
            flux[k][k] = drift[k];
            for l in k + 1..=n {
                flux[k][l] = odds[l] * flux[k][l - 1] + drift[l];
            }
        }
        Ok(Self {
            n,
            log_rho,
            odds,
            drift,
            flux,
        })
    }

    /// ρ_l/ρ_k.
    pub fn ratio(&self, l: usize, k: usize) -> f64 {
        (self.log_rho[l] - self.log_rho[k]).exp()
    }
}

fn check_depth(n: usize, max: usize) -> Result<(), ExpansionError> {
    if n > max {
        return Err(ExpansionError::Depth { max, got: n });
    }
    Ok(())
}

/// `chain[r][j]` = Σ_{j<k_1<⋯<k_r≤n} R_{j+1}^{k_1} R_{k_1+1}^{k_2} ⋯ R_{k_{r−1}+1}^{k_r},
/// the chained window sums of the shifted window (j, n].
fn chain_table(w: &Window) -> Vec<Vec<f64>> {
    let n = w.n;
    let mut chain = vec![vec![1.0; n + 1]];
    for r in 1..=n {
        let prev = &chain[r - 1];
        let row = (0..=n)
            .map(|j| (j + 1..=n).map(|k| w.flux[j + 1][k] * prev[k]).sum())
            .collect();
        chain.push(row);
    }
    chain
}

/// Δ_r^n for r = 0..=n: the coefficient of (−it)^r in B_n − A_n.
pub fn chain_sums(seq: &mut SequenceSet, u: &Direction, n: usize) -> Result<Vec<f64>, ExpansionError> {
    check_depth(n, MAX_EXACT_DEPTH)?;
    let w = Window::load(seq, u, n)?;
    Ok(chain_table(&w).into_iter().map(|row| row[0]).collect())
}

/// `gap[r][j]`: the coefficient of t^{2r} in |B − A|² for the shifted window
/// (j, n], built by the one-step recursion in the first chained window.
fn gap_table(w: &Window) -> Vec<Vec<f64>> {
    let n = w.n;
    let mut gap = vec![vec![1.0; n + 1]];
    for r in 1..=n {
        let prev = &gap[r - 1];
        // weight[k] = K_{r−1}[k] + 2 Σ_{l>k} (ρ_l/ρ_k) K_{r−1}[l]
        let mut weight = vec![0.0; n + 1];
        let mut later = 0.0;
        for k in (1..=n).rev() {
            weight[k] = prev[k] + 2.0 * later;
            later = w.odds[k] * (prev[k] + later);
        }
        let row = (0..=n)
            .map(|j| {
                (j + 1..=n)
                    .map(|k| {
                        let f = w.flux[j + 1][k];
                        f * f * weight[k]
                    })
                    .sum()
            })
            .collect();
        gap.push(row);
    }
    gap
}

/// Coefficient tables at depth n for one direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientTable {
    pub direction: Vec<f64>,
    pub depth: usize,
    /// |B_n − A_n|² = Σ_r t^{2r} gap[r].
    pub gap: Vec<f64>,
    /// |B_n|² = Σ_r t^{2r} denom[r].
    pub denom: Vec<f64>,
    /// Re((B_n − A_n) conj(B_n)) = Σ_r t^{2r} cross_re[r].
    pub cross_re: Vec<f64>,
    /// Im(A_n conj(B_n)) = Σ_r t^{2r+1} cross_im[r], r < n.
    pub cross_im: Vec<f64>,
}

fn even_poly(coeffs: &[f64], t: f64) -> (f64, f64) {
    let t2 = t * t;
    let mut pow = 1.0;
    let (mut sum, mut abs) = (0.0, 0.0);
    for &c in coeffs {
        sum += c * pow;
        abs += (c * pow).abs();
        pow *= t2;
    }
    (sum, abs)
}

impl CoefficientTable {
    /// (value, Σ|terms|) of each polynomial at t, in the order gap, denom,
    /// cross_re, cross_im.
    pub fn evaluate(&self, t: f64) -> [(f64, f64); 4] {
        let (im, im_abs) = even_poly(&self.cross_im, t);
        [
            even_poly(&self.gap, t),
            even_poly(&self.denom, t),
            even_poly(&self.cross_re, t),
            (im * t, im_abs * t.abs()),
        ]
    }
}

/// Builds all four coefficient tables at depth n.
pub fn tables(seq: &mut SequenceSet, u: &Direction, n: usize) -> Result<CoefficientTable, ExpansionError> {
    check_depth(n, MAX_EXACT_DEPTH)?;
    let w = Window::load(seq, u, n)?;
    let gap_rows = gap_table(&w);
    let rho: Vec<f64> = (0..=n).map(|k| w.ratio(k, 0)).collect();
    // 2 v(l) − ρ_l and R_1^l + 2 Σ_{1≤k<l} R_1^k, the pair multiplicities summed over k ≤ l.
    let mut left_rho = Vec::with_capacity(n + 1);
    let mut left_flux = Vec::with_capacity(n + 1);
    let (mut v, mut f) = (0.0, 0.0);
    for l in 0..=n {
        left_rho.push(2.0 * v + rho[l]);
        v += rho[l];
        let r1 = if l >= 1 { w.flux[1][l] } else { 0.0 };
        left_flux.push(2.0 * f + r1);
        f += r1;
    }
    let mut denom = Vec::with_capacity(n + 1);
    let mut cross_re = Vec::with_capacity(n + 1);
    let mut cross_im = Vec::with_capacity(n);
    for (r, row) in gap_rows.iter().enumerate() {
        let weighted = |l: usize| rho[l] * row[l];
        denom.push((0..=n).map(|l| weighted(l) * left_rho[l]).sum());
        cross_re.push((0..=n).map(weighted).sum());
        if r < n {
            cross_im.push((1..=n).map(|l| weighted(l) * left_flux[l]).sum());
        }
    }
    Ok(CoefficientTable {
        direction: u.coords().to_vec(),
        depth: n,
        gap: gap_rows.iter().map(|row| row[0]).collect(),
        denom,
        cross_re,
        cross_im,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::environment::{HorizontalLaw, StratifiedEnvironment, StratumLaw};

    /// ρ ≡ 1 and η ≡ 1 along the axis: p = q = r = 1/3, μ = δ_1.
    fn flat_unit_drift() -> SequenceSet {
        let mu = Arc::new(HorizontalLaw::point_mass(&[1]).unwrap());
        let law = StratumLaw::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, mu).unwrap();
        SequenceSet::new(&StratifiedEnvironment::homogeneous(0.1, law).unwrap()).unwrap()
    }

    #[test]
    fn flat_depth_two() {
        let mut seq = flat_unit_drift();
        let u = Direction::axis(1);
        assert_eq!(chain_sums(&mut seq, &u, 2).unwrap(), vec![1.0, 3.0, 1.0]);
        let t = tables(&mut seq, &u, 2).unwrap();
        assert_eq!(t.gap, vec![1.0, 7.0, 1.0]);
        assert_eq!(t.denom[0], 9.0);
        assert_eq!(t.cross_re[0], 3.0);
    }

    #[test]
    fn gap_matches_alternating_products() {
        let mut seq = flat_unit_drift();
        let u = Direction::axis(1);
        for n in 1..10 {
            let delta = chain_sums(&mut seq, &u, n).unwrap();
            let gap = tables(&mut seq, &u, n).unwrap().gap;
            let d = |i: i64| if i < 0 || i as usize > n { 0.0 } else { delta[i as usize] };
            for r in 0..=n as i64 {
                let expected: f64 = (-r..=r)
                    .map(|p| if p % 2 == 0 { 1.0 } else { -1.0 } * d(r + p) * d(r - p))
                    .sum();
                assert!((gap[r as usize] - expected).abs() <= 1e-9 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_drift_keeps_only_constant_terms() {
        let mu = Arc::new(HorizontalLaw::unit_cross(1).unwrap());
        let law = StratumLaw::new(0.3, 0.4, 0.3, mu).unwrap();
        let mut seq = SequenceSet::new(&StratifiedEnvironment::homogeneous(0.1, law).unwrap()).unwrap();
        let t = tables(&mut seq, &Direction::axis(1), 6).unwrap();
        assert_eq!(t.gap[0], 1.0);
        assert!(t.gap[1..].iter().chain(&t.denom[1..]).chain(&t.cross_re[1..]).all(|&x| x == 0.0));
        assert!(t.cross_im.iter().all(|&x| x == 0.0));
        let v = seq.v_plus(6).unwrap();
        assert!((t.denom[0] - v * v).abs() < 1e-9 * v * v);
        assert!((t.cross_re[0] - v).abs() < 1e-12 * v);
    }

    #[test]
    fn depth_is_capped() {
        let mut seq = flat_unit_drift();
        assert!(matches!(
            tables(&mut seq, &Direction::axis(1), MAX_EXACT_DEPTH + 1),
            Err(ExpansionError::Depth { .. })
        ));
    }
}
