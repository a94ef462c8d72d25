use crate::sequences::{SequenceSet, Side};

use super::{Direction, FluxError};

/// R_k^l(u) = Σ_{s=k}^{l} (η_s·u) ρ_l/ρ_s, summed directly.
pub fn flux_r(seq: &mut SequenceSet, u: &Direction, k: i64, l: i64) -> Result<f64, FluxError> {
    if k > l {
        return Err(FluxError::Order { k, l });
    }
    seq.ensure_levels(k.min(0) - 1, l.max(0))?;
    let lr_l = seq.log_rho(l)?;
    let mut sum = 0.0;
    for s in k..=l {
        sum += u.dot(&seq.drift(s)?) * (lr_l - seq.log_rho(s)?).exp();
    }
    Ok(sum)
}

/// T_k^l(u) = (ρ_{k−1}/ρ_l) (R_k^l(u))².
pub fn flux_t(seq: &mut SequenceSet, u: &Direction, k: i64, l: i64) -> Result<f64, FluxError> {
    let r = flux_r(seq, u, k, l)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok((seq.log_rho(k - 1)? - seq.log_rho(l)?).exp() * r * r)
}

/// Weighted running mean and spread of the prefix values P_j with weights ρ_j.
///
/// For any index set J, Σ_{j<j' in J} ρ_j ρ_{j'} (P_{j'} − P_j)² equals W·S
/// with W the total weight and S the weighted sum of squared deviations.
#[derive(Debug, Clone, Default)]
struct Accumulator {
    weight: Vec<f64>,
    mean: Vec<f64>,
    spread: Vec<f64>,
    last: f64,
}

impl Accumulator {
    fn len(&self) -> usize {
        self.weight.len()
    }

    fn push(&mut self, w: f64, x: f64) {
        self.last = x;
        let Some(&w0) = self.weight.last() else {
            self.weight.push(w);
            self.mean.push(x);
            self.spread.push(0.0);
            return;
        };
        let (m0, s0) = (*self.mean.last().unwrap(), *self.spread.last().unwrap());
        if !(w.is_finite() && w0.is_finite() && x.is_finite() && m0.is_finite()) {
            self.weight.push(f64::INFINITY);
            self.mean.push(x);
            self.spread.push(f64::INFINITY);
            return;
        }
        let total = w0 + w;
        let d = x - m0;
        let mean = m0 + d * w / total;
        self.weight.push(total);
        self.mean.push(mean);
        self.spread.push(s0 + w * d * (x - mean));
    }

    fn stats(&self, i: usize) -> Option<(f64, f64, f64)> {
        Some((*self.weight.get(i)?, self.mean[i], self.spread[i]))
    }
}

fn pair_sum(weight: f64, spread: f64) -> f64 {
    if spread == 0.0 {
        0.0
    } else {
        weight * spread
    }
}

/// Prefix-sum state for one direction u, giving κ_{u,±} and κ_u(−m, n) in O(1)
/// after a linear pass over the materialized levels.
///
/// With P_j = Σ_{s=0}^{j} η_s·u/ρ_s (P_{−1} = 0), the right accumulator runs
/// over j = 0, 1, … and the left one over j = −1, −2, ….
#[derive(Debug, Clone)]
pub struct FluxProfile {
    direction: Direction,
    right: Accumulator,
    left: Accumulator,
}

impl FluxProfile {
    pub fn new(direction: Direction) -> Self {
        Self {
            direction,
            right: Accumulator::default(),
            left: Accumulator::default(),
        }
    }

    /// Builds the profile over every level materialized in `seq`.
    pub fn build(seq: &SequenceSet, direction: Direction) -> Self {
        let mut p = Self::new(direction);
        p.extend(seq);
        p
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    /// Extends both accumulators to the levels materialized in `seq`.
    pub fn extend(&mut self, seq: &SequenceSet) {
        let u = self.direction;
        while self.right.len() < seq.len(Side::Plus) {
            let j = self.right.len() as i64;
            let lr = seq.log_rho_at(j).expect("materialized");
            let step = u.dot(&seq.drift_at(j).expect("materialized")) * (-lr).exp();
            let prev = if j == 0 { 0.0 } else { self.right.last };
            self.right.push(seq.rho_at(j).expect("materialized"), prev + step);
        }
        while self.left.len() < seq.len(Side::Minus) {
            let i = self.left.len() as i64;
            let level = -i - 1;
            let value = if i == 0 {
                0.0
            } else {
                let lr = seq.log_rho_at(-i).expect("materialized");
                let step = u.dot(&seq.drift_at(-i).expect("materialized")) * (-lr).exp();
                self.left.last - step
            };
            self.left.push(seq.rho_at(level).expect("materialized"), value);
        }
    }

    pub fn len(&self, side: Side) -> usize {
        match side {
            Side::Plus => self.right.len(),
            Side::Minus => self.left.len(),
        }
    }

    fn get(acc: &Accumulator, side: Side, i: u64) -> Result<(f64, f64, f64), FluxError> {
        usize::try_from(i)
            .ok()
            .and_then(|i| acc.stats(i))
            .ok_or(FluxError::Window { side, index: i })
    }

    /// κ_{u,+}(n) = Σ_{1≤k≤l≤n} T_k^l(u).
    pub fn kappa_plus(&self, n: u64) -> Result<f64, FluxError> {
        let (w, _, s) = Self::get(&self.right, Side::Plus, n)?;
        Ok(pair_sum(w, s))
    }

    /// κ_{u,−}(m) = Σ_{−m≤k≤l≤−1} T_k^l(u).
    pub fn kappa_minus(&self, m: u64) -> Result<f64, FluxError> {
        let (w, _, s) = Self::get(&self.left, Side::Minus, m)?;
        Ok(pair_sum(w, s))
    }

    /// κ_u(−m, n) = Σ_{−m≤k≤l≤n} T_k^l(u).
    pub fn kappa(&self, m: u64, n: u64) -> Result<f64, FluxError> {
        let (wl, ml, sl) = Self::get(&self.left, Side::Minus, m)?;
        let (wr, mr, sr) = Self::get(&self.right, Side::Plus, n)?;
        if !(wl.is_finite() && wr.is_finite()) {
            return Ok(f64::INFINITY);
        }
        let w = wl + wr;
        let d = ml - mr;
        let s = sl + sr + wl / w * wr * d * d;
        Ok(pair_sum(w, s))
    }

    /// The mean-square spread S behind κ_{u,+}(n) = v_+(n)·S.
    pub fn spread_plus(&self, n: u64) -> Result<f64, FluxError> {
        Ok(Self::get(&self.right, Side::Plus, n)?.2)
    }
}
