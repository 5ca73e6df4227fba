use std::f64::consts::PI;

use ellreg_core::characters::{even_nontrivial_characters, DirichletCharacter};
use ellreg_core::eisenstein::*;
use ellreg_core::specialfns::{dedekind_eta, siegel_theta, SeriesControl, EULER_GAMMA};
use ellreg_core::Complex64;
use num_integer::Integer;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctl() -> SeriesControl {
    SeriesControl::default()
}

fn random_sl2(rng: &mut ChaCha8Rng) -> UnimodularMatrix {
    let mut g = UnimodularMatrix::identity();
    for _ in 0..rng.gen_range(1..6) {
        let step = match rng.gen_range(0..3) {
            0 => UnimodularMatrix::sigma(),
            1 => UnimodularMatrix::translation(),
            _ => UnimodularMatrix::translation().inverse(),
        };
        g = g.mul(&step);
    }
    g
}

#[test]
fn first_limit_formula() {
    let c = ctl();
    for z in [Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.8), Complex64::new(-0.45, 1.7)] {
        let y = z.im;
        let eta = dedekind_eta(z, &c).unwrap();
        let closed = 2.0 * PI * (EULER_GAMMA - 2f64.ln() - y.sqrt().ln() - 2.0 * eta.norm().ln());
        let four = zeta_star(0, 0, 1, z, &c).unwrap();
        assert!((closed - four).abs() < 1e-10, "{closed} vs {four}");
        let four11 = zeta_star(0, 0, 11, z, &c).unwrap();
        assert!((closed - four11).abs() < 1e-10);
    }
}

#[test]
fn second_limit_formula_random() {
    let c = ctl();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n: i64 = [5, 7, 11, 13][rng.gen_range(0..4)];
        let (a, b) = loop {
            let p = (rng.gen_range(0..n), rng.gen_range(0..n));
            if p != (0, 0) {
                break p;
            }
        };
        let z = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.8..2.0));
        let nf = n as f64;
        let w = (a as f64 - b as f64 * z) / nf;
        let th = siegel_theta(w, z, &c).unwrap();
        let closed = 2.0 * PI * PI * (b * b) as f64 / (nf * nf) * z.im - 2.0 * PI * th.norm().ln();
        let four = zeta_star(a, b, n as u64, z, &c).unwrap();
        assert!((closed - four).abs() < 1e-10, "N={n} (a,b)=({a},{b}) z={z}: {closed} vs {four}");
        let sym = zeta_star(-a, -b, n as u64, z, &c).unwrap();
        assert!((sym - four).abs() < 1e-12);
    }
}

#[test]
fn modularity_random() {
    let c = ctl();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..50 {
        let n = 11u64;
        let g = random_sl2(&mut rng);
        let x = (rng.gen_range(0..11i64), rng.gen_range(0..11i64));
        let z = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.9..1.6));
        let gz = g.apply(z);
        if gz.im < 0.15 {
            continue;
        }
        let lhs = e_star(x, n, gz, &c).unwrap();
        let xg = g.act_row(x, n as i64);
        let rhs = e_star(xg, n, z, &c).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0), "g={g:?} x={x:?}: {lhs} vs {rhs}");
    }
}

#[test]
fn complex_conjugation_and_non_primitive_index() {
    let c = ctl();
    let n = 12u64;
    let z = Complex64::new(0.31, 1.1);
    let t = e_star_table(n, z, &c).unwrap();
    let tc = e_star_table(n, -z.conj(), &c).unwrap();
    for u in 0..12i64 {
        for v in 0..12i64 {
            assert!((tc.value(u, v) - t.value(-u, v)).abs() < 1e-11);
        }
    }
    // x = (2, 4) has (u, v, N) = 2: the lattice sum is 2^{−2s} times the
    // level-6 sum at (1, 2), and removing the pole leaves the additive
    // constant −2π·log d / N².
    let shift = |d: f64| -2.0 * PI * d.ln() / 144.0;
    let t6 = e_star_table(6, z, &c).unwrap();
    assert!((t.value(2, 4) - (t6.value(1, 2) / 4.0 + shift(2.0))).abs() < 1e-11);
    let t4 = e_star_table(4, z, &c).unwrap();
    assert!((t.value(3, 9) - (t4.value(1, 3) / 9.0 + shift(3.0))).abs() < 1e-11);
}

#[test]
fn table_matches_direct_e_star() {
    let c = ctl();
    let z = Complex64::new(-0.2, 0.95);
    let t = e_star_table(5, z, &c).unwrap();
    for u in 0..5 {
        for v in 0..5 {
            let direct = e_star((u, v), 5, z, &c).unwrap();
            assert!((direct - t.value(u, v)).abs() < 1e-12);
        }
    }
}

#[test]
fn odd_divisor_gives_zero_series() {
    let c = ctl();
    let chi = DirichletCharacter::from_label("11:g=2,zeta10^1").unwrap();
    assert!(!chi.is_even());
    let f = FinDivisor::from_character(&chi);
    let v = e_star_f(&f, Complex64::new(0.1, 1.3), &c).unwrap();
    assert!(v.norm() < 1e-12);
}

#[test]
fn two_expansions_of_e_star_f_agree() {
    let c = ctl();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for &n in &[11u64, 13] {
        for _ in 0..10 {
            let mut w: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let s: Complex64 = w.iter().sum();
            w[0] -= s;
            let f = FinDivisor::new(w).unwrap();
            for z in [Complex64::new(0.0, 2.0), Complex64::new(0.37, 0.9)] {
                let a = e_star_f(&f, z, &c).unwrap();
                let b = e_star_f_fourier(&f, z, &c).unwrap();
                assert!((a - b).norm() < 1e-10, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn eta_form_antisymmetry() {
    let c = ctl();
    let l = FinDivisor::from_real(&[0.0, 1.0, -2.0, 0.5, 0.5, 0.0, 0.0]).unwrap();
    let m = FinDivisor::from_real(&[1.0, 0.0, 0.0, 3.0, -1.0, 0.0, 2.0]).unwrap();
    let z = Complex64::new(0.2, 1.1);
    let a = eta_form(&l, &m, z, &c).unwrap();
    let b = eta_form(&m, &l, z, &c).unwrap();
    assert!((a.dz + b.dz).norm() < 1e-14);
    assert!((a.dzbar + b.dzbar).norm() < 1e-14);
    // Real divisors give a form with dz̄ = −conj(dz), i.e. purely imaginary on real tangents.
    assert!((a.dzbar + a.dz.conj()).norm() < 1e-12);
    assert!(a.pair(Complex64::new(0.3, -0.7)).re.abs() < 1e-12);
}

fn exterior_derivative(l: &FinDivisor, m: &FinDivisor, z: Complex64) -> Complex64 {
    // dω = (∂_z B − ∂_z̄ A) dz∧dz̄ = −2i(∂_z B − ∂_z̄ A) dx∧dy.
    let c = ctl();
    let h = 1e-4;
    let at = |w: Complex64| eta_form(l, m, w, &c).unwrap();
    let px = at(z + h);
    let mx = at(z - h);
    let py = at(z + Complex64::new(0.0, h));
    let my = at(z - Complex64::new(0.0, h));
    let dx_a = (px.dz - mx.dz) / (2.0 * h);
    let dy_a = (py.dz - my.dz) / (2.0 * h);
    let dx_b = (px.dzbar - mx.dzbar) / (2.0 * h);
    let dy_b = (py.dzbar - my.dzbar) / (2.0 * h);
    let i = Complex64::new(0.0, 1.0);
    let dz_b = 0.5 * (dx_b - i * dy_b);
    let dzbar_a = 0.5 * (dx_a + i * dy_a);
    -2.0 * i * (dz_b - dzbar_a)
}

#[test]
fn exterior_derivative_formula() {
    let c = ctl();
    let n = 7u64;
    let l = FinDivisor::from_real(&[0.0, 1.0, 0.0, 0.0, 2.0, 0.0, 0.0]).unwrap();
    let m = FinDivisor::from_real(&[1.0, 0.0, -1.0, 0.0, 0.0, 0.5, 0.0]).unwrap();
    let z = Complex64::new(0.15, 1.05);
    let numeric = exterior_derivative(&l, &m, z);
    let d = FinDivisor::commutator_divisor(&l, &m).unwrap();
    let y = z.im;
    let expected = Complex64::new(0.0, PI / (n * n) as f64) * e_star_f(&d, z, &c).unwrap() / (y * y);
    assert!((numeric - expected).norm() < 1e-7, "{numeric} vs {expected}");

    let l0 = FinDivisor::from_real(&[0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let m0 = FinDivisor::from_real(&[0.0, 0.0, 0.0, 1.0, 1.0, -2.0, 0.0]).unwrap();
    assert!(exterior_derivative(&l0, &m0, z).norm() < 1e-7);
}

#[test]
fn closed_loop_integral_vanishes() {
    let c = ctl();
    let l = FinDivisor::from_real(&[0.0, 1.0, -1.0, 0.0, 0.0]).unwrap();
    let m = FinDivisor::from_real(&[2.0, 0.0, 0.0, -1.0, -1.0]).unwrap();
    let g = UnimodularMatrix::identity();
    let pts = [
        Complex64::new(-0.2, 0.9),
        Complex64::new(0.3, 1.0),
        Complex64::new(0.25, 1.6),
        Complex64::new(-0.3, 1.4),
    ];
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        total += integrate_eta_pullback(&l, &m, &g, pts[k], pts[(k + 1) % 4], 1e-13, &c)
            .unwrap()
            .value;
    }
    assert!(total.norm() < 1e-9, "{total}");
}

#[test]
fn sigma_class_integral_vanishes() {
    let c = ctl();
    let integ = GeodesicIntegrator::rho_arc(11, 1e-13, c).unwrap();
    for chi in even_nontrivial_characters(11).unwrap() {
        let l = FinDivisor::from_character(&chi);
        let m = FinDivisor::from_character(&chi.conj());
        let v = integ.integrate_pullback(&l, &m, &UnimodularMatrix::sigma()).unwrap();
        assert!(v.value.norm() < 1e-9, "{}", v.value);
        let swapped = integ.integrate_pullback(&m, &l, &UnimodularMatrix::g_v(3)).unwrap();
        let direct = integ.integrate_pullback(&l, &m, &UnimodularMatrix::g_v(3)).unwrap();
        assert!((swapped.value + direct.value).norm() < 1e-12);
    }
    let l = FinDivisor::delta(11, 1).unwrap();
    let rho = Complex64::from_polar(1.0, PI / 3.0);
    let zero = integrate_eta_pullback(&l, &l, &UnimodularMatrix::identity(), rho, rho, 1e-12, &c).unwrap();
    assert_eq!(zero.value, Complex64::new(0.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bottom_row_lift_is_unimodular(u in 0i64..13, v in 0i64..13) {
        prop_assume!(u.gcd(&v).gcd(&13) == 1);
        let g = UnimodularMatrix::from_bottom_row(u, v, 13).unwrap();
        prop_assert_eq!(g.a * g.d - g.b * g.c, 1);
        prop_assert_eq!((g.c.rem_euclid(13), g.d.rem_euclid(13)), (u, v));
    }

    #[test]
    fn e_star_f_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, x in -0.5f64..0.5, y in 0.8f64..2.0) {
        let c = ctl();
        let f = FinDivisor::from_real(&[1.0, 0.0, -1.0, 0.5, 0.0]).unwrap();
        let g = FinDivisor::from_real(&[0.0, 2.0, 0.0, -1.0, 3.0]).unwrap();
        let z = Complex64::new(x, y);
        let h = f.combine(Complex64::new(a, 0.0), &g, Complex64::new(b, 0.0)).unwrap();
        let lhs = e_star_f(&h, z, &c).unwrap();
        let rhs = a * e_star_f(&f, z, &c).unwrap() + b * e_star_f(&g, z, &c).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }
}
