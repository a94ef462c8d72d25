//! Characteristic function χ_D of the excursion displacement, assembled from
//! the two one-sided walk fractions, with the surrogate weights ψ and the
//! discount defect R^±.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::cfrac::{evaluate_walk, CfError, WalkFraction, DEFAULT_MAX_DEPTH};
use crate::environment::{EnvError, StratifiedEnvironment, StratumLaw};
use crate::flux::Direction;
use crate::sequences::{SequenceSet, Side};

/// Default upper limit on t.
pub const DEFAULT_T_LIMIT: f64 = 0.5;

/// Default target for the certified tail bound.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChiError {
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("t = {t} outside [0, {limit}]")]
    OutOfRange { t: f64, limit: f64 },
    #[error("direction has dimension {got}, environment has {expected}")]
    Dimension { expected: usize, got: usize },
}

fn scaled(u: &Direction, t: f64) -> Vec<f64> {
    u.coords().iter().map(|x| x * t).collect()
}

/// E(exp(itu·Σ_{m≤Γ} ξ_m)) with Γ geometric of parameter r and ξ ~ μ:
/// (1 − r)/(1 − r E(ut)).
pub fn law_chf(law: &StratumLaw, u: &Direction, t: f64) -> Complex64 {
    let e = law.mu().characteristic(&scaled(u, t));
    let r = law.r();
    Complex64::new(1.0 - r, 0.0) / (1.0 - r * e)
}

/// The first-order surrogate 1/(1 − itu·η/b) = 1/(1 − itu·m r/(1 − r)).
pub fn law_surrogate(law: &StratumLaw, u: &Direction, t: f64) -> Complex64 {
    let m = law.mu().mean();
    let proj: f64 = u.coords().iter().zip(m).map(|(a, b)| a * b).sum();
    let r = law.r();
    Complex64::new(1.0, 0.0) / Complex64::new(1.0, -t * proj * r / (1.0 - r))
}

pub fn phi_stratum(env: &StratifiedEnvironment, n: i64, u: &Direction, t: f64) -> Result<Complex64, ChiError> {
    Ok(law_chf(&env.stratum(n)?, u, t))
}

pub fn psi_stratum(env: &StratifiedEnvironment, n: i64, u: &Direction, t: f64) -> Result<Complex64, ChiError> {
    Ok(law_surrogate(&env.stratum(n)?, u, t))
}

/// Original level of branch level k on one side.
fn level(side: Side, k: usize) -> i64 {
    match side {
        Side::Plus => k as i64,
        Side::Minus => -(k as i64),
    }
}

/// Smallest slack in |φ_n(ut)| ≤ 1 − (δ³/4) t² over the levels visited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionCheck {
    pub ok: bool,
    pub margin: f64,
    pub worst_level: i64,
}

impl ContractionCheck {
    fn new() -> Self {
        Self {
            ok: true,
            margin: f64::INFINITY,
            worst_level: 0,
        }
    }

    fn record(&mut self, level: i64, margin: f64) {
        if margin < self.margin {
            self.margin = margin;
            self.worst_level = level;
        }
        self.ok &= margin >= 0.0;
    }
}

/// One-sided fraction with weights given per stratum law.
fn side_fraction(
    seq: &mut SequenceSet,
    side: Side,
    weight: impl Fn(&StratumLaw) -> Complex64,
    check: &mut Option<(&mut ContractionCheck, f64)>,
    tol: f64,
) -> Result<WalkFraction, ChiError> {
    let env = seq.env().clone();
    let gamma = |k: usize| -> Result<Complex64, CfError> {
        let n = level(side, k);
        let law = env
            .stratum(n)
            .map_err(|e| CfError::Seq(crate::sequences::SeqError::Env(e)))?;
        let g = weight(&law);
        if let Some((c, bound)) = check.as_mut() {
            c.record(n, *bound - g.norm());
        }
        Ok(g)
    };
    Ok(evaluate_walk(seq, side, gamma, tol, DEFAULT_MAX_DEPTH)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiEvaluation {
    pub direction: Vec<f64>,
    pub t: f64,
    pub chi: Complex64,
    pub chi_plus: Complex64,
    pub chi_minus: Complex64,
    /// Surrogate fractions with weights ψ in place of φ.
    pub f_plus: Complex64,
    pub f_minus: Complex64,
    /// Certified bound on |chi − exact|.
    pub tail_bound: f64,
    pub depth_plus: usize,
    pub depth_minus: usize,
    /// Both χ^± fractions reached the tolerance.
    pub converged: bool,
    /// Both f^± fractions reached the tolerance. Weights ψ equal to 1 make
    /// these converge only like 1/v(n).
    pub surrogate_converged: bool,
    pub contraction: ContractionCheck,
}

fn check_args(seq: &SequenceSet, u: &Direction, t: f64, limit: f64) -> Result<(), ChiError> {
    if !(0.0..=limit).contains(&t) {
        return Err(ChiError::OutOfRange { t, limit });
    }
    let expected = seq.env().dim();
    if u.dim() != expected {
        return Err(ChiError::Dimension {
            expected,
            got: u.dim(),
        });
    }
    Ok(())
}

/// χ_D(ut) = φ_0(ut)(p'_0 χ^+(ut) + q'_0 χ^−(ut)) for 0 ≤ t ≤ `limit`.
pub fn chi_d(seq: &mut SequenceSet, u: &Direction, t: f64, tol: f64, limit: f64) -> Result<ChiEvaluation, ChiError> {
    check_args(seq, u, t, limit)?;
    let one = Complex64::new(1.0, 0.0);
    if t == 0.0 || seq.env().is_horizontally_degenerate() {
        return Ok(ChiEvaluation {
            direction: u.coords().to_vec(),
            t,
            chi: one,
            chi_plus: one,
            chi_minus: one,
            f_plus: one,
            f_minus: one,
            tail_bound: 0.0,
            depth_plus: 0,
            depth_minus: 0,
            converged: true,
            surrogate_converged: true,
            contraction: ContractionCheck::new(),
        });
    }
    let law0 = seq.env().stratum(0)?;
    let delta = seq.env().delta();
    let bound = 1.0 - delta.powi(3) / 4.0 * t * t;
    let mut contraction = ContractionCheck::new();
    contraction.record(0, bound - law_chf(&law0, u, t).norm());
    let chf = |law: &StratumLaw| law_chf(law, u, t);
    let sur = |law: &StratumLaw| law_surrogate(law, u, t);
    let plus = side_fraction(seq, Side::Plus, chf, &mut Some((&mut contraction, bound)), tol)?;
    let minus = side_fraction(seq, Side::Minus, chf, &mut Some((&mut contraction, bound)), tol)?;
    let f_plus = side_fraction(seq, Side::Plus, sur, &mut None, tol)?;
    let f_minus = side_fraction(seq, Side::Minus, sur, &mut None, tol)?;
    let phi0 = law_chf(&law0, u, t);
    let up = law0.up_share();
    let chi = phi0 * (up * plus.value + (1.0 - up) * minus.value);
    Ok(ChiEvaluation {
        direction: u.coords().to_vec(),
        t,
        chi,
        chi_plus: plus.value,
        chi_minus: minus.value,
        f_plus: f_plus.value,
        f_minus: f_minus.value,
        tail_bound: phi0.norm() * (up * plus.tail_bound + (1.0 - up) * minus.tail_bound),
        depth_plus: plus.depth,
        depth_minus: minus.depth,
        converged: plus.converged && minus.converged,
        surrogate_converged: f_plus.converged && f_minus.converged,
        contraction,
    })
}

/// R^±(t) = 1 − E^±((1 − t²)^{σ−1}) on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscountDefect {
    pub t: f64,
    pub plus: f64,
    pub minus: f64,
    pub tail_bound: f64,
    pub converged: bool,
}

/// Discount defect R^± for 0 ≤ t < 1.
pub fn discount_defect(seq: &mut SequenceSet, t: f64, tol: f64) -> Result<DiscountDefect, ChiError> {
    if !(0.0..1.0).contains(&t) {
        return Err(ChiError::OutOfRange { t, limit: 1.0 });
    }
    if t == 0.0 {
        return Ok(DiscountDefect {
            t,
            plus: 0.0,
            minus: 0.0,
            tail_bound: 0.0,
            converged: true,
        });
    }
    let g = Complex64::new(1.0 - t * t, 0.0);
    let plus = evaluate_walk(seq, Side::Plus, |_| Ok(g), tol, DEFAULT_MAX_DEPTH)?;
    let minus = evaluate_walk(seq, Side::Minus, |_| Ok(g), tol, DEFAULT_MAX_DEPTH)?;
    Ok(DiscountDefect {
        t,
        plus: 1.0 - plus.value.re,
        minus: 1.0 - minus.value.re,
        tail_bound: plus.tail_bound.max(minus.tail_bound),
        converged: plus.converged && minus.converged,
    })
}

#[cfg(test)]
mod tests;
