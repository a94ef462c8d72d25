use serde::Serialize;

use crate::environment::{FamilySpec, StratifiedEnvironment, StratumLaw, Structure};
use crate::flux::{direction_grid, phi, FluxProfile, PhiVariant};
use crate::sequences::{SequenceSet, Series, Side, BALANCE_TOLERANCE};

use super::series::{fit_verdict, log_grid, log_log_fit, Fit};
use super::{Classification, ClassifyOptions, CriterionError, Rule, Verdict};

/// Levels checked for antisymmetry when the environment has no finite
/// representative range.
const SYMMETRY_WINDOW: i64 = 200;

/// Relative slack for the vanishing of a drift sum.
const CANCELLATION: f64 = 1e-12;

/// D = Σ_n η_n/ρ_n over Z with a certified bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfPipeSum {
    pub value: f64,
    /// Σ |η_n|/ρ_n over the summed levels.
    pub abs_sum: f64,
    pub tail_bound: f64,
    /// Levels −levels..=levels were summed.
    pub levels: usize,
}

fn drift_bound(env: &StratifiedEnvironment) -> Result<f64, CriterionError> {
    let levels = env.representative_levels().ok_or_else(|| {
        CriterionError::Precondition("no finite set of representative strata".into())
    })?;
    let mut max = 0.0f64;
    for n in levels {
        let law = env.stratum(n)?;
        max = max.max((law.r() * law.mu().mean()[0] / law.p()).abs());
    }
    Ok(max)
}

/// D = Σ_n η_n/ρ_n for d = 1 with Σ 1/ρ_n certified finite.
pub fn halfpipe_sum(seq: &mut SequenceSet) -> Result<HalfPipeSum, CriterionError> {
    if seq.env().dim() != 1 {
        return Err(CriterionError::Precondition(format!(
            "half-pipe sum needs d = 1, got {}",
            seq.env().dim()
        )));
    }
    let (Some(sup_plus), Some(sup_minus)) = (
        seq.supremum_bound(Series::w(Side::Plus)),
        seq.supremum_bound(Series::w(Side::Minus)),
    ) else {
        return Err(CriterionError::Precondition(
            "Σ 1/ρ_n is not certifiably finite".into(),
        ));
    };
    let eta_max = drift_bound(seq.env())?;
    let a0 = seq.a0();
    let (mut value, mut abs_sum) = (0.0, 0.0);
    let mut done = 0i64;
    let mut levels = 64usize;
    let mut previous = f64::INFINITY;
    loop {
        // Levels −levels..=levels; the minus branch index levels − 1 ends at level −levels.
        for n in (done + 1)..=(levels as i64) {
            for level in [n, -n] {
                let x = seq.drift(level)?[0] / seq.rho(level)?;
                value += x;
                abs_sum += x.abs();
            }
        }
        if done == 0 {
            let x = seq.drift(0)?[0] / seq.rho(0)?;
            value += x;
            abs_sum += x.abs();
        }
        done = levels as i64;
        let head_plus = seq.w_plus(levels as u64)?;
        let head_minus = seq.w_minus(levels as u64 - 1)?;
        let tail_bound =
            eta_max * ((sup_plus - head_plus).max(0.0) + a0 * (sup_minus - head_minus).max(0.0));
        // The certified suprema carry a relative inflation, so the bound
        // stalls once the true tail is below it.
        let stalled = tail_bound > 0.5 * previous;
        previous = tail_bound;
        if stalled || tail_bound <= 1e-15 * abs_sum || levels >= 1 << 16 {
            return Ok(HalfPipeSum {
                value,
                abs_sum,
                tail_bound,
                levels,
            });
        }
        levels *= 2;
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// p_{−n} = q_n, r_{−n} = r_n and μ_{−n} = μ_n or its reflection.
fn mirrored_at(minus: &StratumLaw, plus: &StratumLaw, reflect: bool) -> bool {
    let same_mu = if reflect {
        minus.mu().same_distribution(&plus.mu().mirrored())
    } else {
        minus.mu().same_distribution(plus.mu())
    };
    same(minus.p(), plus.q()) && same(minus.r(), plus.r()) && same_mu
}

fn symmetry_window(env: &StratifiedEnvironment) -> i64 {
    env.representative_levels()
        .map(|r| r.start().abs().max(r.end().abs()) + 1)
        .unwrap_or(SYMMETRY_WINDOW)
}

/// Which reflection symmetry the environment has, checked on its
/// representative levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reflection {
    /// p_{−n} = q_n, r_{−n} = r_n, μ_{−n} = μ_n.
    Literal,
    /// p_{−n} = q_n, r_{−n} = r_n, μ_{−n} the reflection of μ_n.
    Point,
    /// ρ_{−n} = ρ_n and m_{−n} = −m_n.
    Antisymmetric,
}

fn reflection(seq: &mut SequenceSet) -> Result<Option<Reflection>, CriterionError> {
    let env = seq.env().clone();
    if env.representative_levels().is_none() {
        return Ok(None);
    }
    let window = symmetry_window(&env);
    let mut literal = true;
    let mut point = true;
    for n in 0..=window {
        let (lo, hi) = (env.stratum(-n)?, env.stratum(n)?);
        literal &= mirrored_at(&lo, &hi, false);
        point &= mirrored_at(&lo, &hi, true);
    }
    if literal {
        return Ok(Some(Reflection::Literal));
    }
    if point {
        return Ok(Some(Reflection::Point));
    }
    if is_antisymmetric(seq, window)? {
        return Ok(Some(Reflection::Antisymmetric));
    }
    Ok(None)
}

/// ρ_{−n} = ρ_n and m_{−n} = −m_n for |n| ≤ window.
fn is_antisymmetric(seq: &mut SequenceSet, window: i64) -> Result<bool, CriterionError> {
    let env = seq.env().clone();
    for n in 0..=window {
        let (a, b) = (seq.log_rho(-n)?, seq.log_rho(n)?);
        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Ok(false);
        }
        let (lo, hi) = (env.stratum(-n)?.mu().mean(), env.stratum(n)?.mu().mean());
        if (0..env.dim()).any(|i| (lo[i] + hi[i]).abs() > 1e-12 * (1.0 + hi[i].abs())) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// d = 1 with Σ 1/ρ_n < ∞ on both sides: D ≠ 0 gives Transient; D = 0 with a
/// reflection symmetry gives Recurrent.
pub fn halfpipe_classify(seq: &mut SequenceSet) -> Result<Classification, CriterionError> {
    let sum = halfpipe_sum(seq)?;
    let slack = sum.tail_bound + CANCELLATION * sum.abs_sum;
    let detail = format!(
        "D = {:e} (tail bound {:e}, {} levels per side)",
        sum.value, sum.tail_bound, sum.levels
    );
    if sum.value.abs() > slack {
        return Ok(Classification::new(Verdict::Transient, Rule::HalfPipe, detail));
    }
    match reflection(seq)? {
        Some(kind) => Ok(Classification::new(
            Verdict::Recurrent,
            Rule::HalfPipe,
            format!("{detail}, reflection {kind:?}"),
        )),
        None => Ok(Classification::new(
            Verdict::Inconclusive,
            Rule::HalfPipe,
            format!("{detail}, no reflection symmetry"),
        )),
    }
}

/// Cascade hook: the half-pipe rule when d = 1 and both w_± are bounded.
pub(super) fn halfpipe_rule(seq: &mut SequenceSet) -> Result<Option<Classification>, CriterionError> {
    if seq.env().dim() != 1
        || seq.supremum_bound(Series::w(Side::Plus)).is_none()
        || seq.supremum_bound(Series::w(Side::Minus)).is_none()
    {
        return Ok(None);
    }
    halfpipe_classify(seq).map(Some)
}

/// Both tails periodic with per-period growth of ρ equal to 1.
fn bounded_periodic(seq: &mut SequenceSet) -> Option<(i64, i64, i64)> {
    let Structure::Periodic { lo, hi, period } = seq.env().structure() else {
        return None;
    };
    for side in [Side::Plus, Side::Minus] {
        let tail = seq.tail(side)?;
        if tail.log_growth.abs() > BALANCE_TOLERANCE {
            return None;
        }
    }
    Some((lo, hi, period))
}

/// d = 2 with ψ(n) ≍ n (p_n = q_n, or bounded periodic ρ): Σ ψ(n)^{-2} < ∞.
pub fn vertical_scale_classify(seq: &mut SequenceSet) -> Result<Option<Classification>, CriterionError> {
    if seq.env().dim() != 2 {
        return Ok(None);
    }
    let detail = if seq.env().is_vertically_balanced() {
        "p_n = q_n at every level"
    } else if bounded_periodic(seq).is_some() {
        "ρ periodic and bounded"
    } else {
        return Ok(None);
    };
    Ok(Some(Classification::new(
        Verdict::Transient,
        Rule::VerticalScale,
        format!("{detail}, ψ(n) ≍ n"),
    )))
}

/// d = 1 with bounded periodic ρ: φ ≍ n when the drift sums Σ η_s/ρ_s over a
/// period vanish on both tails, φ ≳ n² otherwise.
pub fn periodic_drift_classify(seq: &mut SequenceSet) -> Result<Option<Classification>, CriterionError> {
    if seq.env().dim() != 1 {
        return Ok(None);
    }
    let Some((lo, hi, period)) = bounded_periodic(seq) else {
        return Ok(None);
    };
    let mut sums = [0.0; 2];
    let mut zero = true;
    for (slot, levels) in [(hi + 1)..=(hi + period), (lo - period)..=(lo - 1)].into_iter().enumerate() {
        let (mut s, mut abs) = (0.0, 0.0);
        for n in levels {
            let x = seq.drift(n)?[0] / seq.rho(n)?;
            s += x;
            abs += x.abs();
        }
        sums[slot] = s;
        zero &= s.abs() <= CANCELLATION * abs;
    }
    let verdict = if zero {
        Verdict::Recurrent
    } else {
        Verdict::Transient
    };
    Ok(Some(Classification::new(
        verdict,
        Rule::PeriodicDrift,
        format!("period {period}, drift sums {:e} (up), {:e} (down)", sums[0], sums[1]),
    )))
}

/// Power-law threshold: d = 1 recurrent iff α ≥ 1, d = 2 iff α ≥ 3.
pub(super) fn power_law_threshold(env: &StratifiedEnvironment) -> Option<Classification> {
    let Some(FamilySpec::AntisymPowerLaw { alpha, .. }) = env.family_spec() else {
        return None;
    };
    let threshold = match env.dim() {
        1 => 1.0,
        2 => 3.0,
        _ => return None,
    };
    let verdict = if *alpha >= threshold {
        Verdict::Recurrent
    } else {
        Verdict::Transient
    };
    Some(Classification::new(
        verdict,
        Rule::AntisymmetricPowerLaw,
        format!("α = {alpha}, threshold {threshold} for d = {}", env.dim()),
    ))
}

/// Antisymmetric environments: transient iff Σ_n ∫ φ_{u,++}(n)^{-d} du < ∞.
/// The power-law family gets its exact threshold; otherwise the one-sided
/// series is fitted on the diagnostic grid.
pub fn antisymmetric_classify(
    env: &StratifiedEnvironment,
    options: &ClassifyOptions,
) -> Result<Classification, CriterionError> {
    let mut seq = SequenceSet::new(env)?;
    let window = symmetry_window(env).min(SYMMETRY_WINDOW);
    if !is_antisymmetric(&mut seq, window)? {
        return Err(CriterionError::Precondition(format!(
            "ρ_{{-n}} = ρ_n, m_{{-n}} = -m_n fails within |n| ≤ {window}"
        )));
    }
    if let Some(c) = power_law_threshold(env) {
        return Ok(c);
    }
    let dim = env.dim();
    if dim >= 3 {
        return Ok(Classification::new(
            Verdict::Transient,
            Rule::HighDimension,
            format!("d = {dim}"),
        ));
    }
    let fit = one_sided_fit(&mut seq, options)?;
    let verdict = fit_verdict(&fit, options.margin);
    Ok(Classification::new(
        verdict,
        Rule::AntisymmetricSeries,
        format!(
            "slope of ∫ φ_{{u,++}}^(-d) = {:.4} ± {:.4}, margin {}",
            fit.slope,
            2.0 * fit.stderr,
            options.margin
        ),
    ))
}

/// Fit of log ∫ φ_{u,++}(n)^{-d} du against log n.
fn one_sided_fit(seq: &mut SequenceSet, options: &ClassifyOptions) -> Result<Fit, CriterionError> {
    let dim = seq.env().dim();
    let grid = log_grid(options.n_max, options.points);
    let n_max = *grid.last().unwrap_or(&1);
    for side in [Side::Plus, Side::Minus] {
        let k = seq.inverse(Series::v(side), n_max as f64).certified()?;
        if let Some(k) = k {
            seq.ensure(side, k as usize + 1)?;
        }
    }
    let nodes = direction_grid(dim, options.theta_nodes)?;
    let profiles: Vec<_> = nodes
        .iter()
        .map(|node| FluxProfile::build(seq, node.direction))
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in &grid {
        let mut integral = 0.0;
        for (node, profile) in nodes.iter().zip(&profiles) {
            let value = phi(seq, profile, PhiVariant::PlusPlus, n)?;
            integral += node.weight * value.powi(-(dim as i32));
        }
        if integral > 0.0 && integral.is_finite() {
            xs.push(n as f64);
            ys.push(integral);
        }
    }
    log_log_fit(&xs, &ys).ok_or_else(|| CriterionError::Precondition("too few positive terms".into()))
}
