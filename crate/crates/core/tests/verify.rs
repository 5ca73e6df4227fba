use std::f64::consts::PI;

use ellreg_core::characters::{even_nontrivial_characters, gauss_sum};
use ellreg_core::eisenstein::GeodesicIntegrator;
use ellreg_core::elliptic::CurveModel;
use ellreg_core::lseries::{l_at_2, l_twist_at_1, ModularFormData};
use ellreg_core::specialfns::SeriesControl;
use ellreg_core::verify::*;
use ellreg_core::{Complex64, Error};

fn assert_all_pass(reports: &[CheckReport]) {
    for r in reports {
        assert!(r.pass, "{r}");
        assert_eq!(r.pass, r.error() <= r.tolerance);
    }
}

#[test]
fn every_suite_passes_at_eleven() {
    let cfg = VerifyConfig::default();
    let reports = run_all(&cfg).unwrap();
    assert_all_pass(&reports);
    for prefix in ["thm8.identity", "thm1.identity", "thm3.identity"] {
        assert_eq!(reports.iter().filter(|r| r.id.starts_with(prefix)).count(), 4, "{prefix}");
    }
    assert_eq!(reports.iter().filter(|r| r.id.starts_with("cor101")).count(), 2);
    assert_eq!(reports.iter().filter(|r| r.id.starts_with("mahler.identity")).count(), 2);
    assert!(reports.iter().any(|r| r.id == "thm2.residue_free"));
    assert!(reports.iter().any(|r| r.id == "appendix.petersson_vs_residue"));
    // suites come back in a fixed order
    let first: Vec<&str> = reports.iter().map(|r| r.id.split('.').next().unwrap()).collect();
    let mut order = first.clone();
    order.dedup();
    assert_eq!(order, ["thm8", "cor101", "thm1", "thm2", "thm3", "mahler", "appendix"]);
}

#[test]
fn level_seventeen_suites() {
    let cfg = VerifyConfig::for_level(17).unwrap();
    let reports = run_all(&cfg).unwrap();
    assert_all_pass(&reports);
    assert!(!reports.iter().any(|r| r.id.starts_with("thm8") || r.id.starts_with("cor101")));
    // seven even nontrivial characters mod 17; the quadratic one has L(E, χ, 1) = 0
    let thm3: Vec<&CheckReport> = reports.iter().filter(|r| r.id.starts_with("thm3.identity")).collect();
    assert_eq!(thm3.len(), 7);
    let vanishing: Vec<&&CheckReport> = thm3.iter().filter(|r| r.metric == ErrorMetric::Absolute).collect();
    assert_eq!(vanishing.len(), 1);
    assert!(vanishing[0].inputs.characters[0].contains("zeta2"));
}

#[test]
fn thm8_terms_are_consistent() {
    let ctl = SeriesControl::default();
    let d = dilog_multiples_x1_11(&ctl).unwrap();
    assert_eq!(d[0], 0.0);
    assert!((d[1] + d[4]).abs() < 1e-14);
    assert!((d[2] + d[3]).abs() < 1e-14);
    let l2 = l_at_2(&ModularFormData::from_curve(&CurveModel::x1_11(), 4000).unwrap(), &ctl).unwrap();
    for chi in even_nontrivial_characters(11).unwrap() {
        let rhs = thm8_right_side(&chi, &d);
        assert!(rhs.im.abs() < 1e-14);
        assert!((rhs.re - l2).abs() / l2 < 1e-8);
    }
}

#[test]
fn coefficient_sign_convention() {
    // With c taken as +τ(χ̄′)Σχ′(v)∫η_χ and w = −a_p = −1 the relation holds with the
    // opposite sign; the implemented c carries the extra minus sign.
    let ctl = SeriesControl::default();
    let form = ModularFormData::from_curve(&CurveModel::x1_11(), 4000).unwrap();
    let l2 = l_at_2(&form, &ctl).unwrap();
    let integ = GeodesicIntegrator::rho_arc(11, 1e-12, ctl).unwrap();
    let even = even_nontrivial_characters(11).unwrap();
    let lvals: Vec<Complex64> = even.iter().map(|c| l_twist_at_1(&form, c, &ctl).unwrap()).collect();
    let w = reduction_sign(&CurveModel::x1_11()).unwrap();
    assert_eq!(w, -1.0);
    for (k, chi) in even.iter().enumerate() {
        let (ints, _) = eta_chi_integrals(&integ, chi).unwrap();
        let sum: Complex64 = even.iter().zip(&lvals).map(|(cp, l)| coefficient_c(cp, &ints) * l).sum();
        let rhs = 11.0 * w * gauss_sum(chi) / (8.0 * PI * Complex64::i() * 10.0) * sum;
        let lhs = l2 * lvals[k];
        assert!((lhs - rhs).norm() / lhs.norm() < 1e-10);
        assert!((lhs + rhs).norm() / lhs.norm() > 1.9);
        // ∫η_χ over g_v and g_{−1/v} arcs differ by a sign
        for v in 1..11i64 {
            let vinv = ellreg_core::characters::inv_mod(v, 11).unwrap();
            let partner = (-vinv).rem_euclid(11);
            assert!((ints[v as usize - 1] + ints[partner as usize - 1]).norm() < 1e-10);
        }
    }
}

#[test]
fn report_schema_round_trips() {
    let cfg = VerifyConfig::default();
    let reports = run_suite(Suite::Cor101, &cfg).unwrap();
    let json = serde_json::to_string_pretty(&reports).unwrap();
    for key in ["\"id\"", "\"inputs\"", "\"left\"", "\"right\"", "\"abs_error\"", "\"rel_error\"", "\"tolerance\"", "\"pass\"", "\"wall_seconds\"", "\"truncation\""] {
        assert!(json.contains(key), "{key}");
    }
    let back: Vec<CheckReport> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, reports);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(value.is_array());
    assert_eq!(value[0]["truncation"]["q_coefficients"], 4000);
}

#[test]
fn tolerance_override_propagates() {
    let cfg = VerifyConfig {
        tolerance: Some(1e-30),
        ..VerifyConfig::default()
    };
    let reports = run_suite(Suite::Thm2, &cfg).unwrap();
    assert!(reports.iter().all(|r| r.tolerance == 1e-30));
    assert!(reports.iter().any(|r| !r.pass));
    let loose = VerifyConfig {
        tolerance: Some(0.5),
        ..VerifyConfig::default()
    };
    let reports = run_suite(Suite::Thm8, &loose).unwrap();
    assert!(reports.iter().all(|r| r.tolerance == 0.5 && r.pass));
}

#[test]
fn configuration_errors() {
    assert!(matches!(VerifyConfig::for_level(13), Err(Error::InvalidInput(_))));
    let seventeen = VerifyConfig::for_level(17).unwrap();
    assert!(matches!(run_suite(Suite::Thm8, &seventeen), Err(Error::InvalidInput(_))));
    assert!(matches!(run_suite(Suite::Cor101, &seventeen), Err(Error::InvalidInput(_))));
    let bad_tol = VerifyConfig {
        tolerance: Some(-1.0),
        ..VerifyConfig::default()
    };
    assert!(matches!(run_suite(Suite::Thm1, &bad_tol), Err(Error::InvalidInput(_))));
    // 14a: composite conductor
    let composite = VerifyConfig::for_curve(CurveModel::new(1, 0, 1, 4, -6, 14).unwrap());
    assert!(matches!(run_suite(Suite::Thm1, &composite), Err(Error::InvalidInput(_))));
    assert!(matches!(run_suite(Suite::Appendix, &composite), Err(Error::InvalidInput(_))));
    assert!("thm9".parse::<Suite>().is_err());
    for s in ["thm8", "cor101", "thm1", "thm2", "thm3", "mahler", "appendix", "all"] {
        assert_eq!(s.parse::<Suite>().unwrap().name(), s);
    }
}

#[test]
fn report_errors_are_derived() {
    let r = CheckReport::new(
        "x",
        CheckInputs::default(),
        Complex64::new(1.0, 0.0),
        Complex64::new(2.0, 0.0),
        ErrorMetric::Relative,
        0.5,
        0.0,
        Truncation::default(),
    );
    assert_eq!(r.abs_error, 1.0);
    assert_eq!(r.rel_error, 0.5);
    assert!(r.pass);
    let r = CheckReport::new(
        "y",
        CheckInputs::default(),
        Complex64::new(1e-3, 0.0),
        Complex64::new(0.0, 0.0),
        ErrorMetric::Absolute,
        1e-4,
        0.0,
        Truncation::default(),
    );
    assert!(!r.pass);
    assert!(r.to_string().starts_with("FAIL"));
}
