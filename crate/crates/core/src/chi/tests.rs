use std::sync::Arc;

use super::*;
use crate::environment::HorizontalLaw;

fn homogeneous(p: f64, q: f64, mu: HorizontalLaw) -> SequenceSet {
    let law = StratumLaw::new(p, q, 1.0 - p - q, Arc::new(mu)).unwrap();
    SequenceSet::new(&StratifiedEnvironment::homogeneous(0.1, law).unwrap()).unwrap()
}

fn simple() -> SequenceSet {
    homogeneous(1.0 / 3.0, 1.0 / 3.0, HorizontalLaw::unit_cross(1).unwrap())
}

/// Value of [(1, 2/γ); (−1, 2/γ); …]: the root of g² − (2/γ) g + 1 = 0 in the unit disk.
fn balanced_fraction(gamma: Complex64) -> Complex64 {
    let d = 2.0 / gamma;
    let s = (d * d - 4.0).sqrt();
    let g = (d - s) / 2.0;
    if g.norm() <= 1.0 {
        g
    } else {
        (d + s) / 2.0
    }
}

#[test]
fn zero_t_gives_one() {
    let mut seq = simple();
    let e = chi_d(&mut seq, &Direction::axis(1), 0.0, 1e-12, DEFAULT_T_LIMIT).unwrap();
    assert_eq!(e.chi, Complex64::new(1.0, 0.0));
    assert_eq!(discount_defect(&mut seq, 0.0, 1e-12).unwrap().plus, 0.0);
}

#[test]
fn large_t_is_refused() {
    let mut seq = simple();
    assert!(matches!(
        chi_d(&mut seq, &Direction::axis(1), 0.51, 1e-12, DEFAULT_T_LIMIT),
        Err(ChiError::OutOfRange { .. })
    ));
}

#[test]
fn simple_walk_matches_quadratic_root() {
    let mut seq = simple();
    let u = Direction::axis(1);
    for t in [0.1, 0.2, 0.45] {
        let e = chi_d(&mut seq, &u, t, 1e-13, DEFAULT_T_LIMIT).unwrap();
        // φ = (2/3)/(1 − cos(t)/3) for the symmetric unit steps.
        let phi = Complex64::new((2.0 / 3.0) / (1.0 - t.cos() / 3.0), 0.0);
        let expected = phi * balanced_fraction(phi);
        assert!(e.converged && e.contraction.ok);
        assert!(e.chi.im.abs() < 1e-15);
        assert!((e.chi - expected).norm() <= e.tail_bound + 1e-14, "t = {t}");
        assert!(e.chi.norm() <= 1.0);
    }
}

#[test]
fn point_mass_at_origin_gives_one() {
    let mut seq = homogeneous(0.3, 0.3, HorizontalLaw::point_mass(&[0]).unwrap());
    let e = chi_d(&mut seq, &Direction::axis(1), 0.3, 1e-12, DEFAULT_T_LIMIT).unwrap();
    assert_eq!(e.chi, Complex64::new(1.0, 0.0));
}

#[test]
fn mirrored_steps_conjugate_chi() {
    let mu = HorizontalLaw::new(1, &[(vec![2], 0.7), (vec![-1], 0.3)]).unwrap();
    let mut a = homogeneous(0.3, 0.3, mu.clone());
    let mut b = homogeneous(0.3, 0.3, mu.mirrored());
    let u = Direction::axis(1);
    let x = chi_d(&mut a, &u, 0.2, 1e-13, DEFAULT_T_LIMIT).unwrap();
    let y = chi_d(&mut b, &u, 0.2, 1e-13, DEFAULT_T_LIMIT).unwrap();
    assert!(x.chi.im.abs() > 1e-3);
    assert!((x.chi - y.chi.conj()).norm() < 1e-12);
}

#[test]
fn transient_vertical_is_refused() {
    let mut seq = homogeneous(0.4, 0.2, HorizontalLaw::unit_cross(1).unwrap());
    assert!(matches!(
        discount_defect(&mut seq, 0.1, 1e-12),
        Err(ChiError::Cf(CfError::BoundedVertical))
    ));
}

#[test]
fn defect_scales_like_inverse_psi() {
    let mut seq = simple();
    let mut products = Vec::new();
    for i in 0..=10 {
        let t = 10f64.powf(-3.0 + 0.2 * i as f64);
        let r = discount_defect(&mut seq, t, 1e-14).unwrap();
        let g = balanced_fraction(Complex64::new(1.0 - t * t, 0.0)).re;
        assert!((r.plus - (1.0 - g)).abs() <= r.tail_bound + 1e-12);
        let n = seq.psi_inverse(crate::sequences::PsiKind::Plus, 1.0 / t).as_f64();
        products.push(r.plus * n);
    }
    let hi = products.iter().cloned().fold(f64::MIN, f64::max);
    let lo = products.iter().cloned().fold(f64::MAX, f64::min);
    assert!(hi / lo <= 4.0, "{products:?}");
}

#[test]
fn drifted_surrogate_tracks_chi() {
    // Unit drift to the right: f^± should approximate χ^± to order R^±.
    let mu = HorizontalLaw::new(1, &[(vec![1], 0.75), (vec![-1], 0.25)]).unwrap();
    let mut seq = homogeneous(1.0 / 3.0, 1.0 / 3.0, mu);
    let u = Direction::axis(1);
    let mut gap = Vec::new();
    let mut contraction = Vec::new();
    for i in 0..=10 {
        let t = 10f64.powf(-3.0 + 0.2 * i as f64);
        let e = chi_d(&mut seq, &u, t, 1e-14, DEFAULT_T_LIMIT).unwrap();
        let r = discount_defect(&mut seq, t, 1e-14).unwrap();
        gap.push((e.chi_plus - e.f_plus).norm() / r.plus);
        contraction.push((1.0 - e.chi_plus.norm()) / r.plus);
    }
    assert!(gap.iter().all(|&g| g < 10.0), "{gap:?}");
    assert!(contraction.iter().all(|&c| c > 0.05), "{contraction:?}");
}
