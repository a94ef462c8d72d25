//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p strata-cli --test acceptance`.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use strata_core::cfrac::{evaluate_walk, gw_extinction, walk_coefficients, Convergents};
use strata_core::chi::{chi_d, phi_stratum, DEFAULT_TOLERANCE, DEFAULT_T_LIMIT};
use strata_core::criterion::{log_log_fit, SeriesContext};
use strata_core::environment::{
    family, validate, Extension, FamilySpec, HalfPipeDrift, HalfPipeProfile, HorizontalLaw,
    SignRule, StratifiedEnvironment, StratumLaw,
};
use strata_core::expansion::{verify_against_direct, MAX_ORACLE_DEPTH};
use strata_core::flux::{phi_inverse, phi_squared, prepare, Direction, FluxProfile, PhiVariant};
use strata_core::montecarlo::{
    empirical_chf, excursion_path, gw_simulate, local_times, sample_d, stream_rng,
    truncation_bias_bound, ContourTree, GwOptions, DEFAULT_CAP,
};
use strata_core::sequences::{GenInverse, PsiKind, SequenceSet, Series, Side};

type Check = Result<String, String>;

const SEED: u64 = 2024;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// Environments.

fn homogeneous(p: f64, q: f64, dim: usize) -> StratifiedEnvironment {
    let mu = Arc::new(HorizontalLaw::unit_cross(dim).unwrap());
    let law = StratumLaw::new(p, q, 1.0 - p - q, mu).unwrap();
    StratifiedEnvironment::homogeneous(0.1, law).unwrap()
}

fn power_law(dim: usize, alpha: f64, c: Vec<i64>) -> StratifiedEnvironment {
    let spec = FamilySpec::AntisymPowerLaw {
        alpha,
        c,
        r: 1.0 / 3.0,
    };
    family(dim, 0.025, &spec).unwrap()
}

fn campanino_petritis(epsilon: SignRule) -> StratifiedEnvironment {
    family(1, 0.1, &FamilySpec::CampaninoPetritis { p: 1.0 / 3.0, epsilon }).unwrap()
}

fn half_pipe() -> StratifiedEnvironment {
    let spec = FamilySpec::HalfPipe {
        base: 2.0,
        profile: HalfPipeProfile::Symmetric,
        drift: HalfPipeDrift::Constant { c: 1 },
        r: 1.0 / 3.0,
    };
    family(1, 0.1, &spec).unwrap()
}

fn random_law(rng: &mut impl Rng, dim: usize) -> StratumLaw {
    loop {
        let p = rng.random_range(0.1..0.45);
        let q = rng.random_range(0.1..0.45);
        if 1.0 - p - q < 0.1 {
            continue;
        }
        let points = rng.random_range(2..=4);
        let mut support: Vec<(Vec<i64>, f64)> = (0..points)
            .map(|_| {
                let k = (0..dim).map(|_| rng.random_range(-2..=2)).collect();
                (k, rng.random_range(0.1..1.0))
            })
            .collect();
        let total: f64 = support.iter().map(|s| s.1).sum();
        support.iter_mut().for_each(|s| s.1 /= total);
        let Ok(mu) = HorizontalLaw::new(dim, &support) else {
            continue;
        };
        if let Ok(law) = StratumLaw::new(p, q, 1.0 - p - q, Arc::new(mu)) {
            return law;
        }
    }
}

/// A periodic table of 2 to 6 random strata that passes validation.
fn random_env(rng: &mut impl Rng, dim: usize) -> StratifiedEnvironment {
    loop {
        let rows = (0..rng.random_range(2..=6)).map(|_| random_law(rng, dim)).collect();
        let Ok(env) = StratifiedEnvironment::tabulated(dim, 0.05, 0, rows, Extension::Periodic) else {
            continue;
        };
        if validate(&env, -12, 12).is_ok_and(|r| r.passed()) {
            return env;
        }
    }
}

fn direction(rng: &mut impl Rng, dim: usize) -> Direction {
    if dim == 1 {
        Direction::axis(1)
    } else {
        Direction::planar(rng.random_range(-1.5..1.5)).unwrap()
    }
}

fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn band(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    hi / lo
}

// 1. Expansion tables against direct evaluation.

fn expansion_oracle() -> Check {
    let mut rng = stream_rng(SEED, 1);
    let ts = [0.005, 0.05, 0.2, 0.5];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for i in 0..100 {
        let dim = 1 + i % 2;
        let env = random_env(&mut rng, dim);
        let u = direction(&mut rng, dim);
        let mut seq = SequenceSet::new(&env).map_err(err)?;
        for n in 1..=MAX_ORACLE_DEPTH {
            let v = verify_against_direct(&mut seq, &u, n, &ts).map_err(err)?;
            worst = worst.max(v.max_relative_error);
            cases += ts.len();
        }
    }
    verdict(
        worst <= 1e-9,
        format!("max relative error {worst:.2e} over {cases} (env, n, t) cases, limit 1e-9"),
    )
}

// 2. Continued-fraction certificates.

fn continued_fractions() -> Check {
    let mut rng = stream_rng(SEED, 2);
    let mut det_worst = 0.0f64;
    let mut ratio_drop = 0.0f64;
    let mut doubling_worst = 0.0f64;
    let mut compared = 0;
    let mut resolved = 0;
    for i in 0..50 {
        let dim = 1 + i % 2;
        let env = random_env(&mut rng, dim);
        let u = direction(&mut rng, dim);
        let t = rng.random_range(0.005..0.5);
        let mut seq = SequenceSet::new(&env).map_err(err)?;
        let side = [Side::Plus, Side::Minus]
            .into_iter()
            .find(|&s| seq.supremum_bound(Series::v(s)).is_none())
            .ok_or("both sides have bounded v")?;
        let gammas: Vec<Complex64> = (0..=256)
            .map(|k| phi_stratum(&env, k, &u, t))
            .collect::<Result<_, _>>()
            .map_err(err)?;

        let mut conv = Convergents::new();
        let mut product = Complex64::new(1.0, 0.0);
        let mut prev_ratio = f64::NEG_INFINITY;
        for k in 1..=256 {
            let (c, d) = walk_coefficients(&mut seq, side, k, gammas[k]).map_err(err)?;
            let pair = *conv.push(c, d).map_err(err)?;
            let log_ratio = pair.log_abs_b() - seq.value(Series::v(side), k as u64).map_err(err)?.ln();
            ratio_drop = ratio_drop.max(-log_ratio).max(prev_ratio - log_ratio);
            prev_ratio = log_ratio;
            product *= c;
            if pair.log_scale == 0.0 {
                let lhs = pair.a * pair.b_prev - pair.a_prev * pair.b;
                let rhs = if k % 2 == 1 { product } else { -product };
                let scale = (pair.a * pair.b_prev)
                    .norm()
                    .max((pair.a_prev * pair.b).norm())
                    .max(rhs.norm());
                det_worst = det_worst.max((lhs - rhs).norm() / scale);
            }
        }

        for n in [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 64, 128] {
            let gamma = |k: usize| Ok(gammas[k]);
            let short = evaluate_walk(&mut seq, side, gamma, 0.0, n).map_err(err)?;
            let long = evaluate_walk(&mut seq, side, gamma, 0.0, 2 * n).map_err(err)?;
            if short.depth != n || long.depth != 2 * n {
                return Err(format!("depth {} / {} instead of {n} / {}", short.depth, long.depth, 2 * n));
            }
            // Below the rounding level of the values the bound cannot be resolved.
            let rounding = 1e-13 * short.value.norm().max(long.value.norm());
            let gap = (short.value - long.value).norm();
            doubling_worst = doubling_worst.max(gap / (short.tail_bound + rounding));
            compared += 1;
            resolved += usize::from(short.tail_bound > rounding);
        }
    }
    let ok = det_worst <= 1e-11 && ratio_drop <= 1e-12 && doubling_worst <= 1.0 + 1e-9;
    verdict(
        ok,
        format!(
            "determinant rel err {det_worst:.2e}; worst log(|B_n|/v) drop {ratio_drop:.1e}; \
             max |value(n) - value(2n)|/bound(n) = {doubling_worst:.3} over {compared} pairs ({resolved} above rounding)"
        ),
    )
}

// 3. Galton–Watson extinction.

fn galton_watson() -> Check {
    let env = homogeneous(0.3, 0.2, 1);
    let mut seq = SequenceSet::new(&env).map_err(err)?;
    let exact = 2.0 / 3.0;
    let cf = gw_extinction(&mut seq, Side::Plus, 1e-7, 1 << 20).map_err(err)?;
    let sim = gw_simulate(&mut seq, Side::Plus, SEED, &GwOptions::default()).map_err(err)?;
    let cf_gap = (cf.value - exact).abs();
    let z = (sim.estimate - exact).abs() / sim.stderr;
    let ok = cf.tail_bound < 1e-7 && cf_gap <= 1e-6 && sim.undecided == 0 && z <= 3.0;
    verdict(
        ok,
        format!(
            "CF {:.9} at depth {} (bound {:.1e}, off by {cf_gap:.1e}); simulation {:.5} ± {:.5} over {} runs ({z:.2}σ)",
            cf.value, cf.depth, cf.tail_bound, sim.estimate, sim.stderr, sim.runs
        ),
    )
}

// 4. χ_D against Monte Carlo excursions.

fn chi_cross_validation() -> Check {
    let env = homogeneous(1.0 / 3.0, 1.0 / 3.0, 1);
    let mut seq = SequenceSet::new(&env).map_err(err)?;
    let batch = sample_d(&env, SEED, 101_000, DEFAULT_CAP).map_err(err)?;
    let bias = truncation_bias_bound(&batch);
    let mut ok = batch.untruncated() >= 100_000;
    let mut parts = vec![format!("{} untruncated excursions", batch.untruncated())];
    for t in [0.1, 0.2, 0.5] {
        let cf = chi_d(&mut seq, &Direction::axis(1), t, DEFAULT_TOLERANCE, DEFAULT_T_LIMIT).map_err(err)?;
        let mc = empirical_chf(&batch.samples, &[1.0], t).map_err(err)?;
        let allowed = 3.0 * mc.stderr + cf.tail_bound + bias;
        let gap = (cf.chi - mc.value).norm();
        ok &= gap <= allowed;
        parts.push(format!("t={t}: {gap:.1e} <= {allowed:.1e}"));
    }
    verdict(ok, parts.join("; "))
}

// 5. Verdicts through the command-line front end.

fn strata(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_strata"))
        .args(args)
        .output()
        .map_err(err)?;
    if !out.status.success() {
        return Err(format!(
            "strata {} exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    String::from_utf8(out.stdout).map_err(err)
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scan_verdicts(config: &str, alphas: &[f64]) -> Result<Vec<(f64, String)>, String> {
    let values = alphas.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    let path = configs().join(config);
    let text = strata(&["scan", "--config", path.to_str().unwrap(), "--param", "alpha", "--values", &values])?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .records()
        .map(|r| {
            let r = r.map_err(err)?;
            Ok((r[0].parse().map_err(err)?, format!("{} ({})", &r[1], &r[2])))
        })
        .collect()
}

fn verdicts() -> Check {
    let mut failures = Vec::new();
    let mut checked = 0;
    let threshold = "antisymmetric power-law threshold";
    for (config, alphas, flip) in [
        ("power_law_d1.json", vec![0.25, 0.5, 0.9, 0.99, 0.999, 1.0, 1.001, 1.5, 2.0], 1.0),
        ("power_law_d2.json", vec![1.0, 2.0, 2.9, 2.99, 2.999, 3.0, 3.001, 3.5], 3.0),
    ] {
        for (alpha, got) in scan_verdicts(config, &alphas)? {
            let expected = if alpha < flip { "Transient" } else { "Recurrent" };
            let expected = format!("{expected} ({threshold})");
            checked += 1;
            if got != expected {
                failures.push(format!("{config} α={alpha}: {got}"));
            }
        }
    }

    let dir = tempfile::tempdir().map_err(err)?;
    let documents = [
        (
            "cp_alternating",
            r#"{"d": 1, "delta": 0.1, "family": {"kind": "campanino_petritis", "p": 0.3333333333333333, "epsilon": "alternating"}}"#,
            "Recurrent (periodic drift sums)",
        ),
        (
            "cp_step",
            r#"{"d": 1, "delta": 0.1, "family": {"kind": "campanino_petritis", "p": 0.3333333333333333, "epsilon": "step"}}"#,
            "Transient (periodic drift sums)",
        ),
        (
            "plane_balanced",
            r#"{"d": 2, "delta": 0.1, "family": {"kind": "homogeneous", "p": 0.3, "q": 0.3, "r": 0.4, "mu": [[[1, 0], 0.25], [[-1, 0], 0.25], [[0, 1], 0.25], [[0, -1], 0.25]]}}"#,
            "Transient (vertical scale series)",
        ),
        (
            "space",
            r#"{"d": 3, "delta": 0.1, "family": {"kind": "homogeneous", "p": 0.25, "q": 0.25, "r": 0.5, "mu": [[[1, 0, 0], 0.5], [[0, 1, 0], 0.25], [[0, 0, -1], 0.25]]}}"#,
            "Transient (dimension d >= 3)",
        ),
        (
            "half_pipe_constant",
            r#"{"d": 1, "delta": 0.1, "family": {"kind": "half_pipe", "base": 2.0, "profile": "symmetric", "drift": {"kind": "constant", "c": 1}, "r": 0.3333333333333333}}"#,
            "Transient (half-pipe drift sum)",
        ),
        (
            "half_pipe_balanced",
            r#"{"d": 1, "delta": 0.1, "family": {"kind": "half_pipe", "base": 2.0, "profile": "mirror", "drift": {"kind": "antisymmetric", "c": 1}, "r": 0.3333333333333333}}"#,
            "Recurrent (half-pipe drift sum)",
        ),
    ];
    for (name, body, expected) in documents {
        let path = dir.path().join(format!("{name}.json"));
        fs::write(&path, body).map_err(err)?;
        let text = strata(&["classify", "--config", path.to_str().unwrap()])?;
        let got = text.lines().next().unwrap_or_default();
        checked += 1;
        if got != expected {
            failures.push(format!("{name}: {got:?}, expected {expected:?}"));
        }
    }
    if failures.is_empty() {
        Ok(format!("{checked} verdict strings reproduced"))
    } else {
        Err(failures.join("; "))
    }
}

// 6. Growth order of φ_{u,++}.

fn phi_pp_slope(env: &StratifiedEnvironment, u: Direction, squared: bool) -> Result<f64, String> {
    let mut seq = SequenceSet::new(env).map_err(err)?;
    let k = seq
        .inverse(Series::v(Side::Plus), 1e5)
        .finite()
        .ok_or("v_+ saturates before 1e5")?;
    seq.ensure(Side::Plus, k as usize + 1).map_err(err)?;
    let profile = FluxProfile::build(&seq, u);
    let ns: Vec<f64> = log_space(1e3, 1e5, 401).into_iter().map(f64::round).collect();
    let ys = ns
        .iter()
        .map(|&n| {
            let v = phi_squared(&seq, &profile, PhiVariant::PlusPlus, n as u64).map_err(err)?;
            Ok(if squared { v } else { v.sqrt() })
        })
        .collect::<Result<Vec<f64>, String>>()?;
    Ok(log_log_fit(&ns, &ys).ok_or("degenerate fit")?.slope)
}

fn growth_orders() -> Check {
    let plane = phi_pp_slope(&power_law(2, 2.0, vec![3, 0]), Direction::axis(2), true)?;
    let line = phi_pp_slope(&power_law(1, 0.5, vec![1]), Direction::axis(1), false)?;
    let target = 4.0 / 3.0;
    verdict(
        (plane - target).abs() <= 0.1 && (line - target).abs() <= 0.1,
        format!("d=2 α=2 φ²_++ slope {plane:.4}; d=1 α=0.5 φ_++ slope {line:.4}; target 4/3 ± 0.1"),
    )
}

// 7. Bracketing bands.

fn bands_for(env: &StratifiedEnvironment, theta_nodes: usize) -> Result<(f64, f64), String> {
    let ts = log_space(1e-3, 1e-1, 20);
    let mut seq = SequenceSet::new(env).map_err(err)?;
    let ctx = SeriesContext::new(&mut seq, 1.0 / ts[0], theta_nodes).map_err(err)?;
    let nodes = strata_core::flux::direction_grid(env.dim(), theta_nodes).map_err(err)?;
    let mut seq = ctx.sequences().clone();
    let (mut plus_band, mut full_band) = (0.0f64, 0.0f64);
    for (j, node) in nodes.iter().enumerate() {
        let mut plus = Vec::new();
        let mut full = Vec::new();
        for &t in &ts {
            let inv = ctx.inverses(1.0 / t).map_err(err)?[j];
            let chi = chi_d(&mut seq, &node.direction, t, DEFAULT_TOLERANCE, DEFAULT_T_LIMIT).map_err(err)?;
            let defect = Complex64::new(1.0, 0.0) - chi.chi;
            plus.push(inv.plus * defect.re);
            full.push(inv.full * defect.norm());
        }
        plus_band = plus_band.max(band(&plus));
        full_band = full_band.max(band(&full));
    }
    Ok((plus_band, full_band))
}

fn bracketing_bands() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, env, nodes) in [
        ("flat", homogeneous(1.0 / 3.0, 1.0 / 3.0, 1), 1),
        ("power law d=1 α=2", power_law(1, 2.0, vec![1]), 1),
        ("power law d=2 α=2", power_law(2, 2.0, vec![1, 0]), 8),
    ] {
        let (plus, full) = bands_for(&env, nodes)?;
        ok &= plus <= 50.0 && full <= 50.0;
        parts.push(format!("{name}: {plus:.2} / {full:.2}"));
    }
    verdict(ok, format!("max/min (φ_+ Re, φ |.|) {}; limit 50", parts.join(", ")))
}

// 8. Invariant battery.

fn battery() -> Vec<(String, StratifiedEnvironment)> {
    let mut rng = stream_rng(SEED, 8);
    let mut envs = vec![
        ("flat d=1".to_string(), homogeneous(1.0 / 3.0, 1.0 / 3.0, 1)),
        ("flat d=2".to_string(), homogeneous(0.3, 0.3, 2)),
        ("CP alternating".to_string(), campanino_petritis(SignRule::Alternating)),
        ("CP step".to_string(), campanino_petritis(SignRule::Step)),
        ("power law α=0.5".to_string(), power_law(1, 0.5, vec![1])),
        ("power law α=2".to_string(), power_law(1, 2.0, vec![1])),
        ("power law d=2 α=2".to_string(), power_law(2, 2.0, vec![1, 0])),
        ("half-pipe".to_string(), half_pipe()),
    ];
    for (i, dim) in [1, 1, 2].into_iter().enumerate() {
        envs.push((format!("random table {i}"), random_env(&mut rng, dim)));
    }
    envs
}

fn cocycle(env: &StratifiedEnvironment, rng: &mut impl Rng) -> Result<f64, String> {
    let mut seq = SequenceSet::new(env).map_err(err)?;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(-60..=60);
        let k = rng.random_range(-60..=60);
        let mut shifted = SequenceSet::new(&env.shifted(n)).map_err(err)?;
        let lhs = seq.log_rho(n + k).map_err(err)?;
        let rhs = seq.log_rho(n).map_err(err)? + shifted.log_rho(k).map_err(err)?;
        worst = worst.max((lhs - rhs).abs().exp_m1());
    }
    Ok(worst)
}

/// Checks f(k) ≤ x < f(k + 1) for k = f^{-1}(x) on a log grid of x.
fn inverse_contract(
    mut f: impl FnMut(u64) -> Result<f64, String>,
    mut inv: impl FnMut(f64) -> GenInverse,
) -> Result<usize, String> {
    let mut checked = 0;
    for x in log_space(0.5, 1e5, 60) {
        let Some(k) = inv(x).finite() else { continue };
        let (at, next) = (f(k)?, f(k + 1)?);
        let ok = if k == 0 && at > x { true } else { at <= x && next > x };
        if !ok {
            return Err(format!("x = {x}: k = {k}, f(k) = {at}, f(k+1) = {next}"));
        }
        checked += 1;
    }
    Ok(checked)
}

/// max over the grid of f^{-1}(Kx) / (C(K) f^{-1}(x)), where f^{-1}(x) ≥ 1 and both are finite.
fn dominated(mut inv: impl FnMut(f64) -> f64, ks: &[f64], constant: impl Fn(f64) -> f64, x_max: f64) -> f64 {
    let mut worst = 0.0f64;
    for x in log_space(1.0, x_max, 40) {
        let base = inv(x);
        if !(base >= 1.0 && base.is_finite()) {
            continue;
        }
        for &k in ks {
            let scaled = inv(k * x);
            if scaled.is_finite() {
                worst = worst.max(scaled / (constant(k) * base));
            }
        }
    }
    worst
}

/// Largest relative drop of a sequence meant to be non-decreasing.
fn worst_drop(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut prev = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for v in values {
        if prev.is_finite() && v < prev {
            worst = worst.max((prev - v) / prev.abs());
        }
        prev = prev.max(v);
    }
    worst
}

fn kappa_monotonicity(env: &StratifiedEnvironment, u: Direction) -> Result<f64, String> {
    let mut seq = SequenceSet::new(env).map_err(err)?;
    seq.ensure(Side::Plus, 10_001).map_err(err)?;
    seq.ensure(Side::Minus, 10_001).map_err(err)?;
    let profile = FluxProfile::build(&seq, u);
    let v = |seq: &SequenceSet, s: Series, k: u64| seq.value_at(s, k).unwrap();
    let one_sided = (1..=10_000u64)
        .map(|n| profile.kappa_plus(n).unwrap() / v(&seq, Series::VPlus, n))
        .take_while(|x| x.is_finite());
    let mut worst = worst_drop(one_sided);
    let a0 = seq.a0();
    let two_sided = |m: u64, n: u64| {
        profile.kappa(m, n).unwrap() / (v(&seq, Series::VMinus, m) / a0 + v(&seq, Series::VPlus, n))
    };
    for fixed in [0u64, 1, 7, 50, 1000] {
        let along_n = (1..=2000).map(|n| two_sided(fixed, n)).take_while(|x| x.is_finite());
        let along_m = (1..=2000).map(|m| two_sided(m, fixed)).take_while(|x| x.is_finite());
        worst = worst.max(worst_drop(along_n)).max(worst_drop(along_m));
    }
    Ok(worst)
}

fn chi_square(counts: &[u64], probs: &[f64], alpha: f64) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let stat = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let q = ChiSquared::new((counts.len() - 1) as f64).unwrap().inverse_cdf(1.0 - alpha);
    (stat, q)
}

/// Local-time identity on the completed excursions among 1000, then a
/// chi-square test of the horizontal holding times pooled over the levels
/// sharing each value of r. Returns the number of pools tested.
fn excursion_checks(env: &StratifiedEnvironment, seed: u64) -> Result<usize, String> {
    let mut pools: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut complete = 0;
    for stream in 0..1000 {
        let path = excursion_path(env, seed, stream, 1_000_000).map_err(err)?;
        if path.sample.truncated {
            continue;
        }
        complete += 1;
        for (&level, &g) in path.levels.iter().zip(&path.holds) {
            let r = env.stratum(level).map_err(err)?.r();
            pools.entry(r.to_bits()).or_default().push(g);
        }
        if path.levels.len() < 3 {
            continue;
        }
        let z = ContourTree::from_levels(&path.levels).map_err(err)?.generation_sizes();
        let n = local_times(&path.levels);
        for level in 1..n.len() {
            let expected = z.get(level).copied().unwrap_or(0) + z.get(level + 1).copied().unwrap_or(0);
            if n[level] != expected {
                return Err(format!("stream {stream}, level {level}: N = {}, Z_n + Z_n+1 = {expected}", n[level]));
            }
        }
    }
    if complete < 100 {
        return Err(format!("only {complete} of 1000 excursions completed"));
    }
    let bins = 6;
    let mut tested = 0;
    for (bits, gs) in pools.into_iter().filter(|(_, g)| g.len() >= 2000) {
        let r = f64::from_bits(bits);
        let mut counts = vec![0u64; bins + 1];
        gs.iter().for_each(|&g| counts[(g as usize).min(bins)] += 1);
        let mut probs: Vec<f64> = (0..bins).map(|k| r.powi(k as i32) * (1.0 - r)).collect();
        probs.push(r.powi(bins as i32));
        let (stat, q) = chi_square(&counts, &probs, 0.01);
        if stat > q {
            return Err(format!("holding times at r = {r:.4}: chi-square {stat:.2} > {q:.2}"));
        }
        tested += 1;
    }
    Ok(tested)
}

fn invariants() -> Check {
    let mut rng = stream_rng(SEED, 9);
    let mut failures = Vec::new();
    let (mut cocycle_worst, mut psi_worst, mut phi_worst, mut kappa_worst) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut contract_points, mut gamma_levels) = (0, 0);
    for (i, (name, env)) in battery().into_iter().enumerate() {
        let mut fail = |what: &str, detail: String| failures.push(format!("{name}: {what} {detail}"));

        let c = cocycle(&env, &mut rng)?;
        cocycle_worst = cocycle_worst.max(c);
        if c > 1e-10 {
            fail("cocycle", format!("{c:.1e}"));
        }

        let mut seq = SequenceSet::new(&env).map_err(err)?;
        for series in [Series::VPlus, Series::VMinus] {
            let mut probe = seq.clone();
            match inverse_contract(|k| probe.value(series, k).map_err(err), |x| seq.inverse(series, x)) {
                Ok(n) => contract_points += n,
                Err(e) => fail("inverse contract", e),
            }
        }
        let mut probe = seq.clone();
        match inverse_contract(|k| probe.psi(k).map_err(err), |x| seq.psi_inverse(PsiKind::Both, x)) {
            Ok(n) => contract_points += n,
            Err(e) => fail("ψ inverse contract", e),
        }

        let psi = dominated(|x| seq.psi_inverse(PsiKind::Both, x).as_f64(), &[2.0, 5.0, 10.0], |k| 2.0 * k * k, 1e4);
        psi_worst = psi_worst.max(psi);
        if psi > 1.0 {
            fail("ψ dominated variation", format!("ratio {psi:.3}"));
        }

        let delta = env.delta();
        let u = direction(&mut rng, env.dim());
        prepare(&mut seq, 5e4, &[PhiVariant::Plus]).map_err(err)?;
        let profile = FluxProfile::build(&seq, u);
        let phi = dominated(
            |x| phi_inverse(&seq, &profile, PhiVariant::Plus, x).as_f64(),
            &[2.0, 5.0],
            |k| 2.0 * k * k / delta,
            1e4,
        );
        phi_worst = phi_worst.max(phi);
        if phi > 1.0 {
            fail("φ_+ dominated variation", format!("ratio {phi:.3}"));
        }

        let k = kappa_monotonicity(&env, u)?;
        kappa_worst = kappa_worst.max(k);
        if k > 1e-12 {
            fail("κ/v monotonicity", format!("relative drop {k:.1e}"));
        }

        if env.dim() == 1 {
            match excursion_checks(&env, SEED + i as u64) {
                Ok(n) => gamma_levels += n,
                Err(e) => fail("excursions", e),
            }
        }
    }
    let summary = format!(
        "cocycle {cocycle_worst:.1e}; {contract_points} inverse points; dominated variation ψ {psi_worst:.3}, φ_+ {phi_worst:.3} of the bound; \
         κ/v drop {kappa_worst:.1e}; Γ chi-square on {gamma_levels} pools"
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Check); 8] = [
        ("expansion oracle", 30, expansion_oracle),
        ("continued-fraction certificates", 10, continued_fractions),
        ("Galton-Watson extinction", 20, galton_watson),
        ("chi_D cross-validation", 120, chi_cross_validation),
        ("verdict reproduction", 60, verdicts),
        ("phi_++ growth order", 60, growth_orders),
        ("bracketing bands", 120, bracketing_bands),
        ("invariant battery", 180, invariants),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(budget);
        let (passed, detail) = match result {
            Ok(d) if !over => (true, d),
            Ok(d) => (false, format!("{d}; took longer than {budget} s")),
            Err(d) => (false, d),
        };
        failed += usize::from(!passed);
        println!(
            "[{}] {} {name}: {detail} ({:.1} s)",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
