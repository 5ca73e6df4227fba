use std::f64::consts::PI;

use ellreg_core::characters::{enumerate_characters, DirichletCharacter};
use ellreg_core::elliptic::CurveModel;
use ellreg_core::lseries::*;
use ellreg_core::specialfns::SeriesControl;
use ellreg_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctl() -> SeriesControl {
    SeriesControl::default()
}

fn f11() -> ModularFormData {
    ModularFormData::from_curve(&CurveModel::x1_11(), 2000).unwrap()
}

fn all_forms() -> Vec<ModularFormData> {
    let f = f11();
    let mut out = vec![f.clone(), ModularFormData::from_curve(&CurveModel::conductor_17(), 2000).unwrap()];
    for chi in enumerate_characters(11).unwrap().iter().skip(1) {
        out.push(f.twist(chi).unwrap());
    }
    out
}

#[test]
fn q_expansion_basics() {
    let c = ctl();
    let f = f11();
    let z = Complex64::new(0.137, 0.4);
    let a = eval_form(&f, z, &c).unwrap();
    let b = eval_form(&f, z + 1.0, &c).unwrap();
    assert!((a - b).norm() < 1e-14 * a.norm());
    let y = 10.0;
    let lead = (-2.0 * PI * y).exp();
    let v = eval_form(&f, Complex64::new(0.0, y), &c).unwrap();
    assert!((v.re / lead - 1.0).abs() < 1e-20f64.max(2.0 * (-2.0 * PI * y).exp()));
    // doubling the available coefficients changes nothing at z = i
    let short = ModularFormData::from_curve(&CurveModel::x1_11(), 60).unwrap();
    let long = ModularFormData::from_curve(&CurveModel::x1_11(), 120).unwrap();
    let i = Complex64::new(0.0, 1.0);
    let (s, l) = (eval_form(&short, i, &c).unwrap(), eval_form(&long, i, &c).unwrap());
    assert!((s - l).norm() < 1e-14 * l.norm());
    assert!(eval_form(&short, Complex64::new(0.0, 1e-3), &c).is_err());
    assert!(eval_form(&short, Complex64::new(0.0, -1.0), &c).is_err());
}

#[test]
fn root_numbers() {
    let c = ctl();
    let f = f11();
    let w = f.root_number(&c).unwrap();
    assert!((w + 1.0).norm() < 1e-8);
    for g in all_forms() {
        let w = g.root_number(&c).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-8, "{}", g.tag());
    }
    // w(f⊗χ)·w(f⊗χ̄) = 1
    for chi in enumerate_characters(11).unwrap().iter().skip(1) {
        let w1 = f.twist(chi).unwrap().root_number(&c).unwrap();
        let w2 = f.twist(&chi.conj()).unwrap().root_number(&c).unwrap();
        assert!((w1 * w2 - 1.0).norm() < 1e-8);
    }
}

#[test]
fn smoothed_series_matches_dirichlet_series_at_three() {
    let c = ctl();
    let e = CurveModel::x1_11();
    let a = e.an_coefficients(100_000).unwrap();
    let direct: f64 = (1..a.len()).rev().map(|n| a[n] as f64 / (n as f64).powi(3)).sum();
    let completed = 11f64.powf(1.5) * (2.0 * PI).powi(-3) * 2.0 * direct;
    let lam = lambda_value(&f11(), Complex64::new(3.0, 0.0), &c).unwrap();
    assert!(lam.im.abs() < 1e-14);
    assert!((lam.re / completed - 1.0).abs() < 1e-9, "{} vs {completed}", lam.re);
}

#[test]
fn twisted_central_value_normalisation() {
    let c = ctl();
    let f = f11();
    for chi in enumerate_characters(11).unwrap().iter().skip(1) {
        let g = f.twist(chi).unwrap();
        assert_eq!(g.level(), 121);
        assert_eq!(g.coeff(11), Complex64::new(0.0, 0.0));
        let lam = lambda_value(&g, Complex64::new(1.0, 0.0), &c).unwrap();
        let l = l_value(&g, Complex64::new(1.0, 0.0), &c).unwrap();
        assert!((lam - 11.0 / (2.0 * PI) * l).norm() < 1e-12);
        assert!((l - l_twist_at_1(&f, chi, &c).unwrap()).norm() < 1e-12);
        let lbar = l_twist_at_1(&f, &chi.conj(), &c).unwrap();
        assert!((lbar - l.conj()).norm() < 1e-10);
    }
    let trivial = DirichletCharacter::trivial(11).unwrap();
    let same = f.twist(&trivial).unwrap();
    assert_eq!(same.level(), 11);
    assert_eq!(same.coefficients(), f.coefficients());
    let wrong = DirichletCharacter::from_label("13:g=2,zeta12^1").unwrap();
    assert!(f.twist(&wrong).is_err());
}

#[test]
fn split_point_independence() {
    let c = ctl();
    for g in all_forms().iter().take(4) {
        for s in [Complex64::new(1.0, 0.0), Complex64::new(0.6, 2.0), Complex64::new(1.7, -0.5)] {
            let a = lambda_value_split(g, s, 1.0, &c).unwrap();
            let b = lambda_value_split(g, s, 2.0, &c).unwrap();
            assert!((a.value - b.value).norm() < 1e-10 * a.value.norm().max(1.0));
            assert!(a.tail_bound < 1e-14);
        }
    }
}

#[test]
fn functional_equation_residual() {
    let c = ctl();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2b);
    for g in all_forms() {
        let w = g.root_number(&c).unwrap();
        let gbar = g.conjugate();
        for _ in 0..10 {
            let s = Complex64::new(rng.gen_range(0.0..2.0), rng.gen_range(-3.0..3.0));
            let lhs = lambda_value(&g, s, &c).unwrap();
            let rhs = lambda_value(&gbar, 2.0 - s, &c).unwrap();
            assert!((lhs + w * rhs).norm() < 1e-10 * lhs.norm().max(1e-300), "{} at {s}", g.tag());
        }
    }
}

#[test]
fn coefficient_growth() {
    for e in [CurveModel::x1_11(), CurveModel::conductor_17()] {
        let a = e.an_coefficients(3000).unwrap();
        for (n, &an) in a.iter().enumerate().skip(1) {
            let d = (1..=n).filter(|k| n % k == 0).count() as f64;
            assert!((an as f64).abs() <= 4.0 * d * (n as f64).sqrt(), "n = {n}");
        }
    }
}

#[test]
fn convolution_identity_small_cases() {
    let f = f11();
    let chars = enumerate_characters(11).unwrap();
    let (c1, c2) = (&chars[2], &chars[7]);
    let r = rankin_convolution_check(&f, c1, c2, 40).unwrap();
    assert!(r.exact_mismatches.is_empty());
    // n = p prime: a_p (χ₂(p) + p χ₁(p))
    let a = |n: usize| f.coeff(n);
    for p in [2usize, 3, 5, 7, 13] {
        let expected = a(p) * (c2.value(p as i64) + p as f64 * c1.value(p as i64));
        let sigma = c2.value(p as i64) + p as f64 * c1.value(p as i64);
        assert!((a(p) * sigma - expected).norm() < 1e-12);
    }
    let short = ModularFormData::from_curve(&CurveModel::x1_11(), 10).unwrap();
    assert!(rankin_convolution_check(&short, c1, c2, 20).is_err());
    assert!(rankin_convolution_check(&f.twist(c1).unwrap(), c1, c2, 20).is_err());
}

#[test]
fn convolution_identity_to_two_thousand() {
    let f = f11();
    let chars = enumerate_characters(11).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..3 {
        let c1 = &chars[rng.gen_range(0..chars.len())];
        let c2 = &chars[rng.gen_range(0..chars.len())];
        let r = rankin_convolution_check(&f, c1, c2, 2000).unwrap();
        assert!(r.exact_mismatches.is_empty(), "{} {}", c1.label(), c2.label());
        assert!(r.max_abs_error < 1e-10);
    }
}

#[test]
fn residue_is_real_positive() {
    let c = ctl();
    let f = f11();
    let table = twisted_lambda_table(&f, &c).unwrap();
    let r = residue_from_table(11, &table).unwrap();
    assert!(r.im.abs() < 1e-8 && r.re > 0.0);
    assert!((r - rankin_residue(&f, &c).unwrap()).norm() < 1e-14);
    // the summand is symmetric in (χ, χ′), so any relabelling of the table leaves the sum fixed
    let mut shuffled = table.clone();
    shuffled.reverse();
    shuffled.rotate_left(3);
    let r2 = residue_from_table(11, &shuffled).unwrap();
    assert!((r - r2).norm() < 1e-12 * r.re);
}
