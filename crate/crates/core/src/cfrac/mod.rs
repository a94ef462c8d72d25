//! Sleszynski–Pringsheim continued fractions [(c_1, d_1); (c_2, d_2); …],
//! read as c_1/(d_1 + c_2/(d_2 + …)).

mod walk;

use num_complex::Complex64;
use thiserror::Error;

use crate::sequences::SeqError;

pub use walk::{
    evaluate_walk, gw_extinction, gw_gf, walk_coefficients, weighted_excursion_gf, Extinction,
    WalkFraction, DEFAULT_MAX_DEPTH,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CfError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("|c| + 1 > |d| at index {index}")]
    SpViolation { index: usize },
    #[error("zero partial numerator at index {index}")]
    ZeroNumerator { index: usize },
    #[error("weight γ_{index} = {value} outside 0 < |γ| ≤ 1")]
    Weight { index: usize, value: Complex64 },
    #[error("v is bounded on this side, so the walk fraction has no certified tail")]
    BoundedVertical,
    #[error("depth must be at least {min}, got {got}")]
    Depth { min: usize, got: usize },
}

/// Slack allowed in the SP condition |c| + 1 ≤ |d|.
pub const SP_SLACK: f64 = 1e-12;

/// |B_n| above which the convergent state is rescaled.
pub const RENORMALIZE_ABOVE: f64 = 1e100;

/// A_n, B_n together with their predecessors. When rescaled, the stored
/// values are the true ones divided by exp(`log_scale`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergentPair {
    pub n: usize,
    pub a: Complex64,
    pub b: Complex64,
    pub a_prev: Complex64,
    pub b_prev: Complex64,
    pub log_scale: f64,
}

impl ConvergentPair {
    /// A_n/B_n.
    pub fn value(&self) -> Complex64 {
        self.a / self.b
    }

    /// log|B_n| of the unscaled denominator.
    pub fn log_abs_b(&self) -> f64 {
        self.b.norm().ln() + self.log_scale
    }
}

/// Incremental convergents with A_{−1} = 1, A_0 = 0, B_{−1} = 0, B_0 = 1.
#[derive(Debug, Clone)]
pub struct Convergents {
    state: ConvergentPair,
    check_sp: bool,
}

impl Default for Convergents {
    fn default() -> Self {
        Self::new()
    }
}

impl Convergents {
    pub fn new() -> Self {
        Self {
            state: ConvergentPair {
                n: 0,
                a: Complex64::new(0.0, 0.0),
                b: Complex64::new(1.0, 0.0),
                a_prev: Complex64::new(1.0, 0.0),
                b_prev: Complex64::new(0.0, 0.0),
                log_scale: 0.0,
            },
            check_sp: true,
        }
    }

    /// Convergents without the SP check, for formal identities.
    pub fn unchecked() -> Self {
        Self {
            check_sp: false,
            ..Self::new()
        }
    }

    pub fn current(&self) -> &ConvergentPair {
        &self.state
    }

    /// Appends (c_{n+1}, d_{n+1}).
    pub fn push(&mut self, c: Complex64, d: Complex64) -> Result<&ConvergentPair, CfError> {
        let index = self.state.n + 1;
        if c == Complex64::new(0.0, 0.0) {
            return Err(CfError::ZeroNumerator { index });
        }
        if self.check_sp && c.norm() + 1.0 > d.norm() * (1.0 + SP_SLACK) {
            return Err(CfError::SpViolation { index });
        }
        let s = &mut self.state;
        let a = d * s.a + c * s.a_prev;
        let b = d * s.b + c * s.b_prev;
        s.a_prev = s.a;
        s.b_prev = s.b;
        s.a = a;
        s.b = b;
        s.n = index;
        let scale = s.b.norm();
        if scale > RENORMALIZE_ABOVE {
            s.a /= scale;
            s.b /= scale;
            s.a_prev /= scale;
            s.b_prev /= scale;
            s.log_scale += scale.ln();
        }
        Ok(&self.state)
    }
}

/// All convergent pairs of a finite coefficient list.
pub fn convergents(coeffs: &[(Complex64, Complex64)]) -> Result<Vec<ConvergentPair>, CfError> {
    let mut conv = Convergents::new();
    coeffs
        .iter()
        .map(|&(c, d)| conv.push(c, d).copied())
        .collect()
}

/// Value of a finite fraction by backward evaluation.
pub fn evaluate_finite(coeffs: &[(Complex64, Complex64)]) -> Complex64 {
    let mut z = Complex64::new(0.0, 0.0);
    for &(c, d) in coeffs.iter().rev() {
        z = c / (d + z);
    }
    z
}

/// Denominator of [(−c_1, d_1); …; (−c_n, d_n)] computed two ways: directly,
/// and as c_1⋯c_n times the denominator of the reversed fraction
/// [(−1/c_n, d_n/c_n); …; (−1/c_1, d_1/c_1)]. The two agree identically.
pub fn reverse_check(c: &[Complex64], d: &[Complex64]) -> (Complex64, Complex64) {
    assert_eq!(c.len(), d.len(), "one numerator per denominator");
    let forward = denominator(c.iter().zip(d).map(|(&c, &d)| (-c, d)));
    let reversed = denominator(c.iter().zip(d).rev().map(|(&c, &d)| (-1.0 / c, d / c)));
    let product: Complex64 = c.iter().product();
    (forward, product * reversed)
}

fn denominator(coeffs: impl Iterator<Item = (Complex64, Complex64)>) -> Complex64 {
    let (mut b_prev, mut b) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    for (c, d) in coeffs {
        (b_prev, b) = (b, d * b + c * b_prev);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn first_determinant() {
        let pairs = convergents(&[(cx(0.5, 0.2), cx(2.0, -0.3))]).unwrap();
        let p = pairs[0];
        // A_1 B_0 − A_0 B_1 = c_1.
        assert!((p.a * p.b_prev - p.a_prev * p.b - cx(0.5, 0.2)).norm() < 1e-15);
    }

    #[test]
    fn sp_violation_is_reported_with_index() {
        let coeffs = [(cx(0.5, 0.0), cx(2.0, 0.0)), (cx(1.0, 0.0), cx(1.5, 0.0))];
        assert_eq!(convergents(&coeffs), Err(CfError::SpViolation { index: 2 }));
    }

    #[test]
    fn backward_and_forward_agree() {
        let coeffs: Vec<_> = (1..20)
            .map(|k| (cx(0.3 + 0.01 * k as f64, -0.2), cx(1.8, 0.1 * k as f64)))
            .collect();
        let last = *convergents(&coeffs).unwrap().last().unwrap();
        assert!((last.value() - evaluate_finite(&coeffs)).norm() < 1e-14);
    }

    #[test]
    fn reverse_single_level() {
        let (v, w) = reverse_check(&[cx(0.7, 0.1)], &[cx(2.0, 0.5)]);
        assert_eq!(v, cx(2.0, 0.5));
        assert!((w - v).norm() < 1e-15);
    }

    #[test]
    fn renormalization_keeps_ratio() {
        let mut conv = Convergents::new();
        for _ in 0..400 {
            conv.push(cx(1.0, 0.0), cx(10.0, 0.0)).unwrap();
        }
        let p = conv.current();
        assert!(p.log_scale > 0.0);
        // Fixed point of z = 1/(10 + z).
        let z = (-10.0 + 104f64.sqrt()) / 2.0;
        assert!((p.value().re - z).abs() < 1e-15);
        // B_n = (λ^{n+1} − μ^{n+1})/(λ − μ) with λ, μ the roots of x² = 10x + 1.
        let (lam, mu) = (10.0 + z, -z);
        let expected = 401.0 * lam.ln() - (lam - mu).ln();
        assert!((p.log_abs_b() - expected).abs() < 1e-10);
    }
}
