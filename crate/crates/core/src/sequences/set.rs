use serde::Serialize;

use crate::environment::{EnvError, StratifiedEnvironment, Structure, MAX_DIM};

use super::inverse::{generalized_inverse, GenInverse, MonotoneSequence, Prefix, Probe, Saturation};
use super::{SeqError, Series, Side};

/// log ρ beyond which ρ (or 1/ρ) is stored as +∞.
pub const LOG_RANGE: f64 = 700.0;

/// Default number of levels materialized per side.
pub const DEFAULT_LEVEL_CAP: usize = 1 << 22;

/// Per-side arrays. The minus side is the plus side of the reflected
/// environment: index i holds ρ'_i = a_0 ρ_{−i−1}, so that its partial sums
/// are exactly v_− and w_−.
#[derive(Debug, Clone)]
struct Branch {
    env: StratifiedEnvironment,
    reflected: bool,
    log_rho: Vec<f64>,
    rho: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
    /// Odds q/p of the branch environment at branch level i.
    odds: Vec<f64>,
    /// r·m/p of the original environment at the level shown at branch level i.
    drift: Vec<[f64; MAX_DIM]>,
    stop: Option<EnvError>,
    saturated: bool,
    tail: Option<Option<Tail>>,
    /// Cached supremum bounds of v and w.
    bounds: [Option<Option<f64>>; 2],
}

/// Geometric behaviour of a branch past a periodic window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail {
    /// Last non-periodic branch level (at least 0).
    pub start: usize,
    pub period: usize,
    /// log of Π a over one period beyond `start`.
    pub log_growth: f64,
}

impl Branch {
    fn new(env: StratifiedEnvironment, reflected: bool) -> Self {
        Self {
            env,
            reflected,
            log_rho: Vec::new(),
            rho: Vec::new(),
            v: Vec::new(),
            w: Vec::new(),
            odds: Vec::new(),
            drift: Vec::new(),
            stop: None,
            saturated: false,
            tail: None,
            bounds: [None, None],
        }
    }

    fn len(&self) -> usize {
        self.rho.len()
    }

    fn ensure(&mut self, idx: usize, cap: usize) -> Result<(), SeqError> {
        while self.len() <= idx {
            let i = self.len();
            if let Some(e) = &self.stop {
                return Err(SeqError::Env(e.clone()));
            }
            if i >= cap {
                return Err(SeqError::Horizon { index: idx as u64 });
            }
            let law = match self.env.stratum(i as i64) {
                Ok(law) => law,
                Err(e) => {
                    self.stop = Some(e.clone());
                    return Err(SeqError::Env(e));
                }
            };
            let odds = law.odds();
            let lr = if i == 0 {
                0.0
            } else {
                self.log_rho[i - 1] + odds.ln()
            };
            let (rho, inv) = if lr > LOG_RANGE {
                self.saturated = true;
                (f64::INFINITY, (-lr).exp())
            } else if lr < -LOG_RANGE {
                self.saturated = true;
                (lr.exp(), f64::INFINITY)
            } else {
                (lr.exp(), (-lr).exp())
            };
            let (v_prev, w_prev) = if i == 0 {
                (0.0, 0.0)
            } else {
                (self.v[i - 1], self.w[i - 1])
            };
            let mean = law.mu().mean();
            // In the reflected branch p and q are swapped; the drift keeps the original p.
            let p = if self.reflected { law.q() } else { law.p() };
            let scale = law.r() / p;
            self.log_rho.push(lr);
            self.rho.push(rho);
            self.v.push(v_prev + rho);
            self.w.push(w_prev + inv);
            self.odds.push(odds);
            self.drift.push(mean.map(|x| scale * x));
        }
        Ok(())
    }

    fn series(&self, w: bool) -> &[f64] {
        if w {
            &self.w
        } else {
            &self.v
        }
    }

    /// Period growth past the periodic window, when the structure has one.
    fn tail(&mut self, cap: usize) -> Option<Tail> {
        if let Some(t) = self.tail {
            return t;
        }
        let t = match self.env.structure() {
            Structure::Periodic { hi, period, .. } => {
                let start = hi.max(0) as usize;
                let period = period as usize;
                if self.ensure(start + period, cap).is_ok() {
                    let log_growth = (start + 1..=start + period)
                        .map(|k| self.odds[k].ln())
                        .sum();
                    Some(Tail {
                        start,
                        period,
                        log_growth,
                    })
                } else {
                    None
                }
            }
            _ => None,
        };
        self.tail = Some(t);
        t
    }
}

/// Balance tolerance on log of the per-period growth. Within it the sums
/// grow linearly for far longer than any threshold test could observe.
pub const BALANCE_TOLERANCE: f64 = 1e-12;

/// ρ, v_±, w_±, a_n and the drifts η_n of an environment, extended on demand.
#[derive(Debug, Clone)]
pub struct SequenceSet {
    plus: Branch,
    minus: Branch,
    a0: f64,
    cap: usize,
}

impl SequenceSet {
    pub fn new(env: &StratifiedEnvironment) -> Result<Self, SeqError> {
        let mut plus = Branch::new(env.clone(), false);
        let mut minus = Branch::new(env.reflected(), true);
        plus.ensure(0, 1)?;
        minus.ensure(0, 1)?;
        let a0 = plus.odds[0];
        Ok(Self {
            plus,
            minus,
            a0,
            cap: DEFAULT_LEVEL_CAP,
        })
    }

    /// Limits the number of levels materialized per side.
    pub fn with_level_cap(mut self, cap: usize) -> Self {
        self.cap = cap.max(1);
        self
    }

    pub fn env(&self) -> &StratifiedEnvironment {
        &self.plus.env
    }

    pub fn level_cap(&self) -> usize {
        self.cap
    }

    /// a_0 = q_0/p_0.
    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Whether some materialized |log ρ| exceeded [`LOG_RANGE`].
    pub fn is_saturated(&self) -> bool {
        self.plus.saturated || self.minus.saturated
    }

    fn branch(&self, side: Side) -> &Branch {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    fn branch_mut(&mut self, side: Side) -> &mut Branch {
        match side {
            Side::Plus => &mut self.plus,
            Side::Minus => &mut self.minus,
        }
    }

    /// Number of materialized indices on a side.
    pub fn len(&self, side: Side) -> usize {
        self.branch(side).len()
    }

    pub fn ensure(&mut self, side: Side, idx: usize) -> Result<(), SeqError> {
        let cap = self.cap;
        self.branch_mut(side).ensure(idx, cap)
    }

    /// Materializes every level in `[lo, hi]` (and level 0).
    pub fn ensure_levels(&mut self, lo: i64, hi: i64) -> Result<(), SeqError> {
        if hi > 0 {
            self.ensure(Side::Plus, hi as usize)?;
        }
        if lo < 0 {
            // Level n ≤ −1 needs ρ at minus index −n−1 and the drift at −n.
            self.ensure(Side::Minus, (-lo) as usize)?;
        }
        Ok(())
    }

    // Level-indexed lookups on the materialized prefix.

    pub fn log_rho_at(&self, n: i64) -> Option<f64> {
        if n >= 0 {
            self.plus.log_rho.get(n as usize).copied()
        } else {
            let lr = *self.minus.log_rho.get((-n - 1) as usize)?;
            Some(lr - self.a0.ln())
        }
    }

    pub fn rho_at(&self, n: i64) -> Option<f64> {
        if n >= 0 {
            self.plus.rho.get(n as usize).copied()
        } else {
            let lr = self.log_rho_at(n)?;
            Some(if lr > LOG_RANGE { f64::INFINITY } else { lr.exp() })
        }
    }

    /// a_n = q_n/p_n.
    pub fn odds_at(&self, n: i64) -> Option<f64> {
        if n >= 0 {
            self.plus.odds.get(n as usize).copied()
        } else {
            self.minus.odds.get((-n) as usize).map(|a| 1.0 / a)
        }
    }

    /// η_n = r_n m_n / p_n.
    pub fn drift_at(&self, n: i64) -> Option<[f64; MAX_DIM]> {
        if n >= 0 {
            self.plus.drift.get(n as usize).copied()
        } else {
            self.minus.drift.get((-n) as usize).copied()
        }
    }

    fn level_result<T>(&mut self, n: i64, get: impl Fn(&Self) -> Option<T>) -> Result<T, SeqError> {
        self.ensure_levels(n.min(0), n.max(0))?;
        get(self).ok_or(SeqError::Horizon {
            index: n.unsigned_abs(),
        })
    }

    pub fn log_rho(&mut self, n: i64) -> Result<f64, SeqError> {
        self.level_result(n, |s| s.log_rho_at(n))
    }

    pub fn rho(&mut self, n: i64) -> Result<f64, SeqError> {
        self.level_result(n, |s| s.rho_at(n))
    }

    pub fn odds(&mut self, n: i64) -> Result<f64, SeqError> {
        self.level_result(n, |s| s.odds_at(n))
    }

    pub fn drift(&mut self, n: i64) -> Result<[f64; MAX_DIM], SeqError> {
        self.level_result(n, |s| s.drift_at(n))
    }

    // Side-indexed lookups: side level k ≥ 0 of the branch environment.

    /// Odds of the branch environment at branch level k: a_k on the plus
    /// side and 1/a_{−k} on the minus side.
    pub fn side_odds(&mut self, side: Side, k: usize) -> Result<f64, SeqError> {
        self.ensure(side, k)?;
        Ok(self.branch(side).odds[k])
    }

    pub fn side_odds_at(&self, side: Side, k: usize) -> Option<f64> {
        self.branch(side).odds.get(k).copied()
    }

    /// ρ of the branch environment: ρ_k on the plus side, a_0 ρ_{−k−1} on the minus side.
    pub fn side_rho_at(&self, side: Side, k: usize) -> Option<f64> {
        self.branch(side).rho.get(k).copied()
    }

    // Series.

    pub fn value_at(&self, series: Series, k: u64) -> Option<f64> {
        self.branch(series.side())
            .series(series.is_w())
            .get(k as usize)
            .copied()
    }

    pub fn value(&mut self, series: Series, k: u64) -> Result<f64, SeqError> {
        let idx = usize::try_from(k).map_err(|_| SeqError::Horizon { index: k })?;
        self.ensure(series.side(), idx)?;
        Ok(self.value_at(series, k).expect("materialized"))
    }

    pub fn v_plus(&mut self, k: u64) -> Result<f64, SeqError> {
        self.value(Series::VPlus, k)
    }

    pub fn v_minus(&mut self, k: u64) -> Result<f64, SeqError> {
        self.value(Series::VMinus, k)
    }

    pub fn w_plus(&mut self, k: u64) -> Result<f64, SeqError> {
        self.value(Series::WPlus, k)
    }

    pub fn w_minus(&mut self, k: u64) -> Result<f64, SeqError> {
        self.value(Series::WMinus, k)
    }

    /// Period growth of a side past its periodic window.
    pub fn tail(&mut self, side: Side) -> Option<Tail> {
        let cap = self.cap;
        self.branch_mut(side).tail(cap)
    }

    /// A certified upper bound on every term of `series`, when the
    /// environment's structure gives one.
    pub fn supremum_bound(&mut self, series: Series) -> Option<f64> {
        let slot = series.is_w() as usize;
        if let Some(b) = self.branch(series.side()).bounds[slot] {
            return b;
        }
        let b = self.compute_supremum_bound(series);
        self.branch_mut(series.side()).bounds[slot] = Some(b);
        b
    }

    fn compute_supremum_bound(&mut self, series: Series) -> Option<f64> {
        let side = series.side();
        let w = series.is_w();
        if let Some(tail) = self.tail(side) {
            // For w the per-period factor is 1/G.
            let log_g = if w { -tail.log_growth } else { tail.log_growth };
            if log_g >= -BALANCE_TOLERANCE {
                return None;
            }
            let b = self.branch(side);
            let head = b.series(w)[tail.start];
            let one_period: f64 = (tail.start + 1..=tail.start + tail.period)
                .map(|k| if w { (-b.log_rho[k]).exp() } else { b.rho[k] })
                .sum();
            let bound = head + one_period / -log_g.exp_m1();
            return Some(inflate(bound));
        }
        if let Structure::PowerLaw { alpha } = self.branch(side).env.structure() {
            // Both sides have ρ'_k ∈ {k^α, (k+1)^α}, so with e the exponent of the
            // summand, Σ_{k>N} ≤ N^{e+1}/(−e−1) whenever e < −1.
            let e = if w { -alpha } else { alpha };
            if e >= -1.0 {
                return None;
            }
            let n = 64usize;
            self.ensure(side, n).ok()?;
            let head = self.branch(side).series(w)[n];
            let tail = (n as f64).powf(e + 1.0) / (-e - 1.0);
            return Some(inflate(head + tail));
        }
        None
    }

    /// sup{k : series(k) ≤ x}, extending the side as needed.
    pub fn inverse(&mut self, series: Series, x: f64) -> GenInverse {
        generalized_inverse(&mut SeriesView { set: self, series }, x)
    }

    /// Inverse on the materialized prefix only, for read-only parallel use.
    /// Certified infinities need the bound to have been computed beforehand
    /// through [`SequenceSet::supremum_bound`].
    pub fn inverse_at(&self, series: Series, x: f64) -> GenInverse {
        let b = self.branch(series.side());
        if let Some(Some(bound)) = b.bounds[series.is_w() as usize] {
            if bound <= x {
                return GenInverse::Infinite(Saturation::Certified);
            }
        }
        generalized_inverse(&mut Prefix(b.series(series.is_w())), x)
    }

    /// ψ²(−m, n) = n·w_+(v_+^{-1}(n)) + m·w_−(v_−^{-1}(m)); +∞ when an inverse is.
    pub fn psi_squared(&mut self, m: u64, n: u64) -> Result<f64, SeqError> {
        let plus = self.psi_term(Side::Plus, n)?;
        let minus = self.psi_term(Side::Minus, m)?;
        Ok(plus + minus)
    }

    fn psi_term(&mut self, side: Side, n: u64) -> Result<f64, SeqError> {
        if n == 0 {
            return Ok(0.0);
        }
        match self.inverse(Series::v(side), n as f64).certified()? {
            Some(k) => Ok(n as f64 * self.value(Series::w(side), k)?),
            None => Ok(f64::INFINITY),
        }
    }

    /// ψ(n) = ψ(−n, n).
    pub fn psi(&mut self, n: u64) -> Result<f64, SeqError> {
        Ok(self.psi_squared(n, n)?.sqrt())
    }

    /// ψ_+(n) = ψ(0, n).
    pub fn psi_plus(&mut self, n: u64) -> Result<f64, SeqError> {
        Ok(self.psi_squared(0, n)?.sqrt())
    }

    /// ψ_−(n) = ψ(−n, 0).
    pub fn psi_minus(&mut self, n: u64) -> Result<f64, SeqError> {
        Ok(self.psi_squared(n, 0)?.sqrt())
    }

    /// Value of ψ, ψ_+ or ψ_− at n.
    pub fn psi_kind(&mut self, kind: PsiKind, n: u64) -> Result<f64, SeqError> {
        match kind {
            PsiKind::Both => self.psi(n),
            PsiKind::Plus => self.psi_plus(n),
            PsiKind::Minus => self.psi_minus(n),
        }
    }

    /// sup{n : ψ(n) ≤ x} for the chosen variant of ψ.
    pub fn psi_inverse(&mut self, kind: PsiKind, x: f64) -> GenInverse {
        generalized_inverse(&mut PsiView { set: self, kind }, x)
    }
}

/// ψ(n) = ψ(−n, n), ψ_+(n) = ψ(0, n), ψ_−(n) = ψ(−n, 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiKind {
    Both,
    Plus,
    Minus,
}

struct PsiView<'a> {
    set: &'a mut SequenceSet,
    kind: PsiKind,
}

impl MonotoneSequence for PsiView<'_> {
    fn probe(&mut self, n: u64) -> Probe {
        match self.set.psi_kind(self.kind, n) {
            Ok(v) => Probe::Value(v),
            Err(_) => Probe::Beyond,
        }
    }
}

fn inflate(bound: f64) -> f64 {
    bound * (1.0 + 1e-12) + f64::MIN_POSITIVE
}

/// One of the four series viewed as a [`MonotoneSequence`] that extends the set.
pub struct SeriesView<'a> {
    pub set: &'a mut SequenceSet,
    pub series: Series,
}

impl MonotoneSequence for SeriesView<'_> {
    fn probe(&mut self, n: u64) -> Probe {
        match self.set.value(self.series, n) {
            Ok(v) => Probe::Value(v),
            Err(_) => Probe::Beyond,
        }
    }

    fn supremum_bound(&mut self) -> Option<f64> {
        self.set.supremum_bound(self.series)
    }
}
