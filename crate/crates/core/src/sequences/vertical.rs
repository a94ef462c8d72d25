use serde::Serialize;

use crate::environment::Structure;

use super::{SequenceSet, Series, Side, BALANCE_TOLERANCE};

/// Recurrence of the vertical birth–death chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerticalClass {
    Recurrent,
    Transient,
    Undetermined,
}

/// Why a side's v was judged divergent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DivergenceEvidence {
    /// Per-period growth of ρ is at least 1 (up to the balance tolerance).
    PeriodicGrowth { log_growth: f64 },
    /// ρ_n ≍ n^α with α ≥ −1.
    PowerLaw { alpha: f64 },
    /// v exceeded the threshold at `index` with increments bounded below.
    Threshold { index: u64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SideBehaviour {
    Divergent(DivergenceEvidence),
    Bounded { supremum: f64 },
    Undetermined { reached: u64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerticalThresholds {
    /// v must exceed this for the threshold rule.
    pub divergence: f64,
    /// Increments must stay above δ times this.
    pub increment_factor: f64,
}

impl Default for VerticalThresholds {
    fn default() -> Self {
        Self {
            divergence: 1e9,
            increment_factor: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerticalReport {
    pub class: VerticalClass,
    pub plus: SideBehaviour,
    pub minus: SideBehaviour,
    pub horizon: u64,
}

pub fn vertical_classification(seq: &mut SequenceSet, horizon: u64) -> VerticalReport {
    vertical_classification_with(seq, horizon, &VerticalThresholds::default())
}

/// The chain is recurrent iff v_+ and v_− both diverge. Transient needs a
/// certified bound on one side, Recurrent needs evidence on both.
pub fn vertical_classification_with(
    seq: &mut SequenceSet,
    horizon: u64,
    thresholds: &VerticalThresholds,
) -> VerticalReport {
    let plus = side_behaviour(seq, Side::Plus, horizon.max(1), thresholds);
    let minus = side_behaviour(seq, Side::Minus, horizon.max(1), thresholds);
    let class = match (plus, minus) {
        (SideBehaviour::Bounded { .. }, _) | (_, SideBehaviour::Bounded { .. }) => {
            VerticalClass::Transient
        }
        (SideBehaviour::Divergent(_), SideBehaviour::Divergent(_)) => VerticalClass::Recurrent,
        _ => VerticalClass::Undetermined,
    };
    VerticalReport {
        class,
        plus,
        minus,
        horizon,
    }
}

fn side_behaviour(
    seq: &mut SequenceSet,
    side: Side,
    horizon: u64,
    thresholds: &VerticalThresholds,
) -> SideBehaviour {
    let series = Series::v(side);
    if let Some(supremum) = seq.supremum_bound(series) {
        return SideBehaviour::Bounded { supremum };
    }
    if let Some(tail) = seq.tail(side) {
        if tail.log_growth >= -BALANCE_TOLERANCE {
            return SideBehaviour::Divergent(DivergenceEvidence::PeriodicGrowth {
                log_growth: tail.log_growth,
            });
        }
    }
    if let Structure::PowerLaw { alpha } = seq.env().structure() {
        if alpha >= -1.0 {
            return SideBehaviour::Divergent(DivergenceEvidence::PowerLaw { alpha });
        }
    }
    let floor = seq.env().delta() * thresholds.increment_factor;
    let mut reached = 0u64;
    let mut value = 0.0;
    for k in 0..=horizon {
        match seq.value(series, k) {
            Ok(v) => {
                reached = k;
                value = v;
                if v > thresholds.divergence {
                    let steady = (k / 2..=k).all(|j| {
                        seq.side_rho_at(side, j as usize)
                            .is_some_and(|r| r >= floor)
                    });
                    if steady {
                        return SideBehaviour::Divergent(DivergenceEvidence::Threshold {
                            index: k,
                            value: v,
                        });
                    }
                    break;
                }
            }
            Err(_) => break,
        }
    }
    SideBehaviour::Undetermined { reached, value }
}
