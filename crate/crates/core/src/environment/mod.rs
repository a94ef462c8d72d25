//! Stratified environments: one transition law per vertical level.

mod config;
mod family;
mod law;
mod validate;

use std::ops::RangeInclusive;
use std::sync::Arc;

use thiserror::Error;

pub use config::{EnvironmentConfig, Extension, TableRow, TableSpec};
pub use family::{family, FamilySpec, HalfPipeDrift, HalfPipeProfile, SignRule};
pub use law::{HorizontalLaw, Site, StratumLaw, MAX_DIM};
pub use validate::{validate, ConditionCheck, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("unsupported dimension {0} (expected 1..=3)")]
    Dimension(usize),
    #[error("horizontal law has empty support")]
    EmptySupport,
    #[error("support point has {found} coordinates, expected {expected}")]
    PointDimension { expected: usize, found: usize },
    #[error("invalid mass {0}")]
    Mass(f64),
    #[error("support point {0:?} listed twice")]
    DuplicatePoint(Vec<i64>),
    #[error("masses sum to {0}, expected 1")]
    MassSum(f64),
    #[error("invalid probability {0}")]
    Probability(f64),
    #[error("p + q + r = {0}, expected 1")]
    ProbabilitySum(f64),
    #[error("delta {0} outside (0, 1/3]")]
    Delta(f64),
    #[error("level {level} outside tabulated window [{lo}, {hi}]")]
    OutOfDomain { level: i64, lo: i64, hi: i64 },
    #[error("empty level range")]
    EmptyRange,
    #[error("family rejected: {0}")]
    Family(String),
    #[error("malformed configuration: {0}")]
    Config(String),
}

/// How the strata repeat, used for tail certificates and whole-lattice checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Structure {
    /// `stratum(n) = stratum(n − period)` for every `n > hi` and
    /// `stratum(n) = stratum(n + period)` for every `n < lo`.
    Periodic { lo: i64, hi: i64, period: i64 },
    /// The power-law family with ρ_n = max(1,|n|)^α.
    PowerLaw { alpha: f64 },
    /// Only levels in `[lo, hi]` exist.
    Window { lo: i64, hi: i64 },
    /// No usable description beyond pointwise queries.
    Opaque,
}

/// Level-to-law map for environments given pointwise.
pub type LevelFn = Arc<dyn Fn(i64) -> Result<StratumLaw, EnvError> + Send + Sync>;

pub(crate) struct FnSource(LevelFn);

impl std::fmt::Debug for FnSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FnSource")
    }
}

#[derive(Debug)]
pub(crate) enum Source {
    Function(FnSource),
    Homogeneous(StratumLaw),
    CampaninoPetritis {
        rule: SignRule,
        forward: StratumLaw,
        backward: StratumLaw,
    },
    PowerLaw {
        alpha: f64,
        r: f64,
        below: Arc<HorizontalLaw>,
        at_zero: Arc<HorizontalLaw>,
        above: Arc<HorizontalLaw>,
    },
    HalfPipe {
        base: f64,
        profile: HalfPipeProfile,
        drift: HalfPipeDrift,
        r: f64,
        laws: Vec<(i64, Arc<HorizontalLaw>)>,
    },
    Table {
        lo: i64,
        rows: Vec<StratumLaw>,
        extension: Extension,
    },
}

impl Source {
    fn stratum(&self, n: i64) -> Result<StratumLaw, EnvError> {
        match self {
            Source::Function(FnSource(f)) => f(n),
            Source::Homogeneous(law) => Ok(law.clone()),
            Source::CampaninoPetritis {
                rule,
                forward,
                backward,
            } => {
                let positive = match rule {
                    SignRule::Alternating => n.rem_euclid(2) == 0,
                    SignRule::Step => n >= 0,
                };
                Ok(if positive { forward } else { backward }.clone())
            }
            Source::PowerLaw {
                alpha,
                r,
                below,
                at_zero,
                above,
            } => {
                let mu = match n.signum() {
                    1 => above,
                    0 => at_zero,
                    _ => below,
                };
                let (p, q, r) = power_law_rates(*alpha, *r, n);
                StratumLaw::new(p, q, r, Arc::clone(mu))
            }
            Source::HalfPipe {
                base,
                profile,
                drift,
                r,
                laws,
            } => {
                let odds = match (n.signum(), profile) {
                    (1, _) => *base,
                    (0, HalfPipeProfile::Mirror) => 1.0,
                    _ => 1.0 / base,
                };
                let value = drift.value(n);
                let mu = laws
                    .iter()
                    .find(|(x, _)| *x == value)
                    .map(|(_, law)| Arc::clone(law))
                    .expect("half-pipe laws cover every drift value");
                let vertical = 1.0 - r;
                StratumLaw::new(
                    vertical / (1.0 + odds),
                    vertical * odds / (1.0 + odds),
                    *r,
                    mu,
                )
            }
            Source::Table {
                lo,
                rows,
                extension,
            } => {
                let hi = lo + rows.len() as i64 - 1;
                let idx = match extension {
                    _ if (*lo..=hi).contains(&n) => (n - lo) as usize,
                    Extension::Periodic => (n - lo).rem_euclid(rows.len() as i64) as usize,
                    Extension::Constant => {
                        if n < *lo {
                            0
                        } else {
                            rows.len() - 1
                        }
                    }
                    Extension::Reject => {
                        return Err(EnvError::OutOfDomain { level: n, lo: *lo, hi })
                    }
                };
                Ok(rows[idx].clone())
            }
        }
    }

    fn structure(&self) -> Structure {
        match self {
            Source::Function(_) => Structure::Opaque,
            Source::Homogeneous(_) => Structure::Periodic {
                lo: 0,
                hi: 0,
                period: 1,
            },
            Source::CampaninoPetritis { rule, .. } => match rule {
                SignRule::Alternating => Structure::Periodic {
                    lo: 0,
                    hi: 0,
                    period: 2,
                },
                SignRule::Step => Structure::Periodic {
                    lo: -1,
                    hi: 0,
                    period: 1,
                },
            },
            Source::PowerLaw { alpha, .. } => Structure::PowerLaw { alpha: *alpha },
            Source::HalfPipe { drift, .. } => Structure::Periodic {
                lo: -1,
                hi: 2,
                period: drift.period(),
            },
            Source::Table {
                lo,
                rows,
                extension,
            } => {
                let hi = lo + rows.len() as i64 - 1;
                match extension {
                    Extension::Periodic => Structure::Periodic {
                        lo: *lo,
                        hi,
                        period: rows.len() as i64,
                    },
                    Extension::Constant => Structure::Periodic {
                        lo: *lo,
                        hi,
                        period: 1,
                    },
                    Extension::Reject => Structure::Window { lo: *lo, hi },
                }
            }
        }
    }
}

/// log a_n for the power-law family, where a_n = ρ_n/ρ_{n−1} and ρ_n = max(1,|n|)^α.
pub(crate) fn power_law_log_odds(alpha: f64, n: i64) -> f64 {
    if n >= 2 {
        alpha * ((n as f64).ln() - ((n - 1) as f64).ln())
    } else if n <= -1 {
        -power_law_log_odds(alpha, 1 - n)
    } else {
        0.0
    }
}

/// (p_n, q_n, r_n) of the power-law family. The ratio r_n/p_n is held at
/// its value 2r/(1 − r) at balanced levels, so that r_n m_n/p_n inherits the
/// antisymmetry of m_n.
pub(crate) fn power_law_rates(alpha: f64, r: f64, n: i64) -> (f64, f64, f64) {
    let odds = power_law_log_odds(alpha, n).exp();
    let ratio = 2.0 * r / (1.0 - r);
    let p = 1.0 / (1.0 + ratio + odds);
    (p, odds * p, ratio * p)
}

/// A random-walk environment on Z^d × Z whose law depends only on the level.
#[derive(Debug, Clone)]
pub struct StratifiedEnvironment {
    dim: usize,
    delta: f64,
    source: Arc<Source>,
    // Level n of this environment reads source level sign·n + offset.
    sign: i64,
    offset: i64,
    overrides: Arc<Vec<(i64, StratumLaw)>>,
    family: Option<FamilySpec>,
}

impl StratifiedEnvironment {
    pub(crate) fn from_source(
        dim: usize,
        delta: f64,
        source: Source,
        family: Option<FamilySpec>,
    ) -> Result<Self, EnvError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(EnvError::Dimension(dim));
        }
        if !(delta > 0.0 && delta <= 1.0 / 3.0 + PROB_SLACK) {
            return Err(EnvError::Delta(delta));
        }
        Ok(Self {
            dim,
            delta,
            source: Arc::new(source),
            sign: 1,
            offset: 0,
            overrides: Arc::new(Vec::new()),
            family,
        })
    }

    /// A tabulated environment on `[lo, lo + rows.len() − 1]`.
    pub fn tabulated(
        dim: usize,
        delta: f64,
        lo: i64,
        rows: Vec<StratumLaw>,
        extension: Extension,
    ) -> Result<Self, EnvError> {
        if rows.is_empty() {
            return Err(EnvError::EmptyRange);
        }
        if let Some(bad) = rows.iter().find(|s| s.dim() != dim) {
            return Err(EnvError::PointDimension {
                expected: dim,
                found: bad.dim(),
            });
        }
        Self::from_source(dim, delta, Source::Table { lo, rows, extension }, None)
    }

    /// An environment given level by level. Nothing beyond pointwise queries
    /// is known about it, so tail certificates fall back to thresholds.
    pub fn from_fn(dim: usize, delta: f64, f: LevelFn) -> Result<Self, EnvError> {
        Self::from_source(dim, delta, Source::Function(FnSource(f)), None)
    }

    /// Homogeneous environment with the same stratum at every level.
    pub fn homogeneous(delta: f64, law: StratumLaw) -> Result<Self, EnvError> {
        Self::from_source(law.dim(), delta, Source::Homogeneous(law), None)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The uniformity constant claimed by the builder.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The family this environment was built from, if unmodified.
    pub fn family_spec(&self) -> Option<&FamilySpec> {
        self.family.as_ref()
    }

    pub fn is_reflected(&self) -> bool {
        self.sign < 0
    }

    fn source_level(&self, n: i64) -> i64 {
        self.sign * n + self.offset
    }

    /// Law at level `n`.
    pub fn stratum(&self, n: i64) -> Result<StratumLaw, EnvError> {
        let source_level = self.source_level(n);
        let law = match self.overrides.iter().find(|(l, _)| *l == source_level) {
            Some((_, law)) => law.clone(),
            None => self.source.stratum(source_level).map_err(|e| match e {
                EnvError::OutOfDomain { .. } => match self.domain() {
                    Some((lo, hi)) => EnvError::OutOfDomain { level: n, lo, hi },
                    None => e,
                },
                other => other,
            })?,
        };
        Ok(if self.sign < 0 { law.swapped() } else { law })
    }

    /// The environment seen from below: level n becomes −n and up/down swap.
    pub fn reflected(&self) -> Self {
        Self {
            sign: -self.sign,
            family: None,
            ..self.clone()
        }
    }

    /// The shifted environment θ^k: its level n is level n + k here.
    pub fn shifted(&self, k: i64) -> Self {
        if k == 0 {
            return self.clone();
        }
        Self {
            offset: self.offset + self.sign * k,
            family: None,
            ..self.clone()
        }
    }

    /// Replaces a single stratum, keeping everything else.
    pub fn perturbed(&self, level: i64, law: StratumLaw) -> Result<Self, EnvError> {
        if law.dim() != self.dim {
            return Err(EnvError::PointDimension {
                expected: self.dim,
                found: law.dim(),
            });
        }
        let source_level = self.source_level(level);
        let law = if self.sign < 0 { law.swapped() } else { law };
        let mut overrides: Vec<_> = self
            .overrides
            .iter()
            .filter(|(l, _)| *l != source_level)
            .cloned()
            .collect();
        overrides.push((source_level, law));
        Ok(Self {
            overrides: Arc::new(overrides),
            family: None,
            ..self.clone()
        })
    }

    /// Repetition structure in this environment's own coordinates.
    pub fn structure(&self) -> Structure {
        let mut s = self.source.structure();
        for &(level, _) in self.overrides.iter() {
            s = match s {
                Structure::Periodic { lo, hi, period } => Structure::Periodic {
                    lo: lo.min(level - period),
                    hi: hi.max(level + period),
                    period,
                },
                Structure::PowerLaw { .. } => Structure::Opaque,
                other => other,
            };
        }
        // Source level s corresponds to level sign·(s − offset) here.
        let map = |lo: i64, hi: i64| {
            let (a, b) = (self.sign * (lo - self.offset), self.sign * (hi - self.offset));
            (a.min(b), a.max(b))
        };
        match s {
            Structure::Periodic { lo, hi, period } => {
                let (lo, hi) = map(lo, hi);
                Structure::Periodic { lo, hi, period }
            }
            Structure::Window { lo, hi } => {
                let (lo, hi) = map(lo, hi);
                Structure::Window { lo, hi }
            }
            Structure::PowerLaw { .. } if self.offset != 0 => Structure::Opaque,
            other => other,
        }
    }

    /// Levels that may be queried, when the environment is not total.
    pub fn domain(&self) -> Option<(i64, i64)> {
        match self.structure() {
            Structure::Window { lo, hi } => Some((lo, hi)),
            _ => None,
        }
    }

    /// A finite range of levels whose strata exhaust all strata of the
    /// environment, when one exists.
    pub fn representative_levels(&self) -> Option<RangeInclusive<i64>> {
        match self.structure() {
            Structure::Periodic { lo, hi, period } => Some(lo - period..=hi + period),
            Structure::Window { lo, hi } => Some(lo..=hi),
            _ => None,
        }
    }

    /// Whether `pred` holds at every level, when decidable from the structure.
    pub fn holds_everywhere(&self, pred: impl Fn(&StratumLaw) -> bool) -> Option<bool> {
        let levels = self.representative_levels()?;
        for n in levels {
            match self.stratum(n) {
                Ok(law) if !pred(&law) => return Some(false),
                Ok(_) => {}
                Err(_) => return None,
            }
        }
        Some(true)
    }

    /// p_n = q_n at every level.
    pub fn is_vertically_balanced(&self) -> bool {
        if let Structure::PowerLaw { alpha } = self.structure() {
            return alpha == 0.0;
        }
        self.holds_everywhere(|s| s.p() == s.q()).unwrap_or(false)
    }

    /// Every horizontal law is the Dirac mass at the origin.
    pub fn is_horizontally_degenerate(&self) -> bool {
        if let Structure::PowerLaw { .. } = self.structure() {
            return false;
        }
        self.holds_everywhere(|s| s.mu().is_degenerate())
            .unwrap_or(false)
    }
}

const PROB_SLACK: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;

    fn cross_law(p: f64, q: f64, r: f64) -> StratumLaw {
        StratumLaw::new(p, q, r, Arc::new(HorizontalLaw::unit_cross(1).unwrap())).unwrap()
    }

    #[test]
    fn table_extensions() {
        let rows = vec![cross_law(0.2, 0.4, 0.4), cross_law(0.4, 0.2, 0.4)];
        let periodic =
            StratifiedEnvironment::tabulated(1, 0.1, 0, rows.clone(), Extension::Periodic).unwrap();
        assert_eq!(periodic.stratum(5).unwrap().p(), 0.4);
        assert_eq!(periodic.stratum(-2).unwrap().p(), 0.2);
        let constant =
            StratifiedEnvironment::tabulated(1, 0.1, 0, rows.clone(), Extension::Constant).unwrap();
        assert_eq!(constant.stratum(-7).unwrap().p(), 0.2);
        let reject = StratifiedEnvironment::tabulated(1, 0.1, 0, rows, Extension::Reject).unwrap();
        assert!(matches!(
            reject.stratum(2),
            Err(EnvError::OutOfDomain { level: 2, .. })
        ));
    }

    #[test]
    fn reflection_swaps_and_mirrors_levels() {
        let rows = vec![cross_law(0.2, 0.4, 0.4), cross_law(0.3, 0.3, 0.4)];
        let env = StratifiedEnvironment::tabulated(1, 0.1, 0, rows, Extension::Constant).unwrap();
        let refl = env.reflected();
        let s = refl.stratum(-1).unwrap();
        assert_eq!((s.p(), s.q()), (0.3, 0.3));
        let s = refl.stratum(0).unwrap();
        assert_eq!((s.p(), s.q()), (0.4, 0.2));
        assert_eq!(
            refl.structure(),
            Structure::Periodic {
                lo: -1,
                hi: 0,
                period: 1
            }
        );
    }

    #[test]
    fn shift_composes_with_reflection() {
        let rows: Vec<_> = (0..5)
            .map(|i| cross_law(0.1 + 0.05 * i as f64, 0.3, 0.6 - 0.05 * i as f64))
            .collect();
        let env = StratifiedEnvironment::tabulated(1, 0.05, 0, rows, Extension::Reject).unwrap();
        let shifted = env.shifted(2);
        assert_eq!(shifted.stratum(1).unwrap(), env.stratum(3).unwrap());
        assert_eq!(shifted.domain(), Some((-2, 2)));
        let both = env.reflected().shifted(-3);
        assert_eq!(both.stratum(0).unwrap(), env.stratum(3).unwrap().swapped());
        assert_eq!(both.domain(), Some((-1, 3)));
        assert!(matches!(
            shifted.stratum(3),
            Err(EnvError::OutOfDomain { level: 3, lo: -2, hi: 2 })
        ));
    }

    #[test]
    fn perturbation_widens_periodic_structure() {
        let env = StratifiedEnvironment::homogeneous(0.1, cross_law(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0))
            .unwrap();
        let env = env.perturbed(5, cross_law(0.2, 0.4, 0.4)).unwrap();
        assert_eq!(env.stratum(5).unwrap().p(), 0.2);
        assert_eq!(env.stratum(6).unwrap().p(), 1.0 / 3.0);
        assert_eq!(
            env.structure(),
            Structure::Periodic {
                lo: 0,
                hi: 6,
                period: 1
            }
        );
        assert!(!env.is_vertically_balanced());
    }
}
