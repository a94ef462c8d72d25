use serde::Serialize;

use super::{EnvError, StratifiedEnvironment};

/// Outcome of one hypothesis over a range of levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub ok: bool,
    /// Level with the smallest margin.
    pub worst_level: i64,
    /// Smallest slack over the range; negative when the condition fails.
    pub margin: f64,
}

impl ConditionCheck {
    fn new() -> Self {
        Self {
            ok: true,
            worst_level: 0,
            margin: f64::INFINITY,
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

/// The three standing hypotheses checked level by level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checked_range: (i64, i64),
    pub delta: f64,
    /// min{p, q, r} ≥ δ.
    pub condition1: ConditionCheck,
    /// Σ ‖k‖^{max(d,3)} μ(k) ≤ 1/δ.
    pub condition2: ConditionCheck,
    /// Smallest eigenvalue of Σ k kᵀ μ(k) is at least δ.
    pub condition3: ConditionCheck,
    /// The second-moment matrix is nonsingular at every level.
    pub group_full_rank: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.condition1.ok && self.condition2.ok && self.condition3.ok
    }

    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        for (name, c) in [
            ("condition 1 (min p,q,r)", &self.condition1),
            ("condition 2 (moment)", &self.condition2),
            ("condition 3 (eigenvalue)", &self.condition3),
        ] {
            if !c.ok {
                parts.push(format!(
                    "{name} fails at n = {} (margin {:.3e})",
                    c.worst_level, c.margin
                ));
            }
        }
        if parts.is_empty() {
            "all conditions hold".to_string()
        } else {
            parts.join("; ")
        }
    }
}

/// Checks every level in `[lo, hi]` against the environment's declared δ.
pub fn validate(env: &StratifiedEnvironment, lo: i64, hi: i64) -> Result<ValidationReport, EnvError> {
    if hi < lo {
        return Err(EnvError::EmptyRange);
    }
    let delta = env.delta();
    let mut c1 = ConditionCheck::new();
    let mut c2 = ConditionCheck::new();
    let mut c3 = ConditionCheck::new();
    let mut full_rank = true;
    for n in lo..=hi {
        let s = env.stratum(n)?;
        c1.record(n, s.min_probability() - delta);
        c2.record(n, 1.0 / delta - s.mu().tail_moment());
        let eig = s.mu().smallest_eigenvalue();
        c3.record(n, eig - delta);
        full_rank &= eig > 1e-12;
    }
    Ok(ValidationReport {
        checked_range: (lo, hi),
        delta,
        condition1: c1,
        condition2: c2,
        condition3: c3,
        group_full_rank: full_rank,
    })
}
