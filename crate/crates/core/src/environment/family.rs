use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::TableSpec;
use super::{
    power_law_rates, validate, EnvError, HorizontalLaw, Source, StratifiedEnvironment,
    StratumLaw,
};

/// Sign pattern ε_n of the Campanino–Petritis drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRule {
    /// ε_n = (−1)^n.
    Alternating,
    /// ε_n = 1 for n ≥ 0 and −1 for n < 0.
    Step,
}

/// Shape of ρ for the half-pipe family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPipeProfile {
    /// ρ_n = base^{|n|}.
    #[default]
    Symmetric,
    /// p_{−n} = q_n at every level, so ρ_{−n} = ρ_{n−1}.
    Mirror,
}

/// Horizontal mean m_n of the half-pipe family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HalfPipeDrift {
    Constant { c: i64 },
    Antisymmetric { c: i64 },
    Alternating { c: i64 },
}

impl HalfPipeDrift {
    pub(crate) fn value(&self, n: i64) -> i64 {
        match *self {
            HalfPipeDrift::Constant { c } => c,
            HalfPipeDrift::Antisymmetric { c } => c * n.signum(),
            HalfPipeDrift::Alternating { c } => {
                if n.rem_euclid(2) == 0 {
                    c
                } else {
                    -c
                }
            }
        }
    }

    pub(crate) fn period(&self) -> i64 {
        match self {
            HalfPipeDrift::Alternating { .. } => 2,
            _ => 1,
        }
    }

    fn values(&self) -> Vec<i64> {
        let mut v: Vec<i64> = (-2..=2).map(|n| self.value(n)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Closed-form and tabulated environment families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// d = 1, p_n = q_n = p, μ_n = δ_{ε_n}.
    CampaninoPetritis { p: f64, epsilon: SignRule },
    /// ρ_n = max(1,|n|)^α on both sides, m_n = c·sign(n).
    AntisymPowerLaw { alpha: f64, c: Vec<i64>, r: f64 },
    /// d = 1, geometric ρ with Σ 1/ρ_n < ∞.
    HalfPipe {
        base: f64,
        #[serde(default)]
        profile: HalfPipeProfile,
        drift: HalfPipeDrift,
        r: f64,
    },
    Homogeneous {
        p: f64,
        q: f64,
        r: f64,
        mu: Vec<(Vec<i64>, f64)>,
    },
    Tabulated(TableSpec),
}

/// Window on which closed-form families must re-validate.
pub const FAMILY_CHECK_RANGE: (i64, i64) = (-200, 200);

/// Builds the environment for `spec` in dimension `dim` with uniformity constant `delta`.
pub fn family(dim: usize, delta: f64, spec: &FamilySpec) -> Result<StratifiedEnvironment, EnvError> {
    let source = match spec {
        FamilySpec::Tabulated(table) => return table.build(dim, delta),
        FamilySpec::CampaninoPetritis { p, epsilon } => {
            require_dim(dim, 1, "Campanino–Petritis")?;
            let r = 1.0 - 2.0 * p;
            let forward = StratumLaw::new(*p, *p, r, Arc::new(HorizontalLaw::point_mass(&[1])?))?;
            let backward = StratumLaw::new(*p, *p, r, Arc::new(HorizontalLaw::point_mass(&[-1])?))?;
            Source::CampaninoPetritis {
                rule: *epsilon,
                forward,
                backward,
            }
        }
        FamilySpec::AntisymPowerLaw { alpha, c, r } => {
            if c.len() != dim {
                return Err(EnvError::PointDimension {
                    expected: dim,
                    found: c.len(),
                });
            }
            if c.iter().all(|&x| x == 0) {
                return Err(EnvError::Family("drift c must be nonzero".into()));
            }
            if !alpha.is_finite() {
                return Err(EnvError::Family(format!("alpha = {alpha}")));
            }
            let (above, below, at_zero) = if dim == 1 {
                (
                    HorizontalLaw::point_mass(c)?,
                    HorizontalLaw::point_mass(&[-c[0]])?,
                    HorizontalLaw::unit_cross(1)?,
                )
            } else {
                let cross = HorizontalLaw::unit_cross(dim)?;
                let neg: Vec<i64> = c.iter().map(|x| -x).collect();
                (cross.shifted(c)?, cross.shifted(&neg)?, cross)
            };
            // |log a_n| is largest at n = 2 and n = −1.
            for n in [-1, 2] {
                let (p, q, _) = power_law_rates(*alpha, *r, n);
                if p < delta || q < delta || p > 1.0 - 2.0 * delta || q > 1.0 - 2.0 * delta {
                    return Err(EnvError::Family(format!(
                        "alpha = {alpha} gives p = {p:.6}, q = {q:.6} at level {n}, outside [δ, 1 − 2δ] for δ = {delta}"
                    )));
                }
            }
            Source::PowerLaw {
                alpha: *alpha,
                r: *r,
                below: Arc::new(below),
                at_zero: Arc::new(at_zero),
                above: Arc::new(above),
            }
        }
        FamilySpec::HalfPipe {
            base,
            profile,
            drift,
            r,
        } => {
            require_dim(dim, 1, "half-pipe")?;
            if !(*base > 1.0 && base.is_finite()) {
                return Err(EnvError::Family(format!("half-pipe base {base} must exceed 1")));
            }
            let laws = drift
                .values()
                .into_iter()
                .map(|x| {
                    let law = if x == 0 {
                        HorizontalLaw::unit_cross(1)
                    } else {
                        HorizontalLaw::point_mass(&[x])
                    };
                    law.map(|l| (x, Arc::new(l)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Source::HalfPipe {
                base: *base,
                profile: *profile,
                drift: *drift,
                r: *r,
                laws,
            }
        }
        FamilySpec::Homogeneous { p, q, r, mu } => {
            let law = StratumLaw::new(*p, *q, *r, Arc::new(HorizontalLaw::new(dim, mu)?))?;
            Source::Homogeneous(law)
        }
    };
    let env = StratifiedEnvironment::from_source(dim, delta, source, Some(spec.clone()))?;
    let report = validate(&env, FAMILY_CHECK_RANGE.0, FAMILY_CHECK_RANGE.1)?;
    if !report.passed() {
        return Err(EnvError::Family(format!(
            "hypotheses fail at δ = {delta}: {}",
            report.summary()
        )));
    }
    Ok(env)
}

fn require_dim(dim: usize, expected: usize, name: &str) -> Result<(), EnvError> {
    if dim == expected {
        Ok(())
    } else {
        Err(EnvError::Family(format!("{name} family requires d = {expected}, got {dim}")))
    }
}
