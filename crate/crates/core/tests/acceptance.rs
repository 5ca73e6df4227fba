//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Tolerances and runtime limits are fixed here and do not read the per-check
//! tolerances carried by the reports.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use ellreg_core::characters::enumerate_characters;
use ellreg_core::eisenstein::{e_star, zeta_star, FinDivisor, UnimodularMatrix};
use ellreg_core::elliptic::{elliptic_dilog, periods, CurveModel, PeriodLattice};
use ellreg_core::lseries::{lambda_value, rankin_convolution_check, ModularFormData};
use ellreg_core::modsym::{period_integral_oracle, xi_table_bridge, ManinSpace, SymbolIndex};
use ellreg_core::munits::unit_divisor;
use ellreg_core::specialfns::{dedekind_eta, periodic_bernoulli2, siegel_theta, SeriesControl, EULER_GAMMA};
use ellreg_core::verify::{run_suite, CheckReport, Suite, VerifyConfig};
use ellreg_core::{par, Complex64};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

struct Suites {
    reports: Vec<CheckReport>,
    seconds: Vec<(Suite, f64)>,
}

impl Suites {
    fn run(cfg: &VerifyConfig) -> Result<Self, String> {
        let mut reports = Vec::new();
        let mut seconds = Vec::new();
        for s in Suite::CONCRETE {
            let t = Instant::now();
            reports.extend(run_suite(s, cfg).map_err(|e| format!("{s}: {e}"))?);
            seconds.push((s, t.elapsed().as_secs_f64()));
        }
        Ok(Self { reports, seconds })
    }

    fn seconds(&self, s: Suite) -> f64 {
        self.seconds.iter().find(|(t, _)| *t == s).map_or(f64::INFINITY, |x| x.1)
    }

    fn with_prefix(&self, prefix: &str) -> Vec<&CheckReport> {
        self.reports.iter().filter(|r| r.id.starts_with(prefix)).collect()
    }

    fn one(&self, id: &str) -> Result<&CheckReport, String> {
        self.reports.iter().find(|r| r.id == id).ok_or_else(|| format!("missing report {id}"))
    }
}

/// Largest error over a non-empty group of reports, or an error when it is empty.
fn worst(group: &[&CheckReport], what: &str) -> Result<f64, String> {
    if group.is_empty() {
        return Err(format!("no {what} reports"));
    }
    Ok(group.iter().map(|r| r.error()).fold(0.0, f64::max))
}

fn c1_l_value(s: &Suites) -> Outcome {
    let r = s.one("cor101.l_value")?;
    let secs = s.seconds(Suite::Cor101);
    Ok((r.rel_error < 1e-8 && secs < 10.0, format!("rel {:.2e} < 1e-8, {secs:.2}s < 10s", r.rel_error)))
}

fn c2_exotic(s: &Suites) -> Outcome {
    let r = s.one("cor101.exotic")?;
    Ok((
        r.rel_error < 1e-10 && r.wall_seconds < 2.0,
        format!("rel {:.2e} < 1e-10, {:.2}s < 2s", r.rel_error, r.wall_seconds),
    ))
}

fn c3_thm8(s: &Suites) -> Outcome {
    let g = s.with_prefix("thm8.identity[");
    let e = g.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok((g.len() == 4 && e < 1e-8, format!("{} characters, max rel {e:.2e} < 1e-8", g.len())))
}

fn c4_thm1(s: &Suites) -> Outcome {
    let g = s.with_prefix("thm1.identity[");
    let e = g.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let odd = worst(&s.with_prefix("thm1.odd_coefficients["), "odd coefficient")?;
    let secs = s.seconds(Suite::Thm1);
    Ok((
        g.len() == 4 && e < 1e-6 && odd < 1e-9 && secs < 60.0,
        format!("{} characters, max rel {e:.2e} < 1e-6, odd max {odd:.2e} < 1e-9, {secs:.2}s < 60s", g.len()),
    ))
}

fn c5_thm2(s: &Suites) -> Outcome {
    let a = s.one("thm2.with_residue")?.rel_error;
    let b = s.one("thm2.residue_free")?.rel_error;
    Ok((a < 1e-6 && b < 1e-6, format!("with residue rel {a:.2e}, residue-free rel {b:.2e} (< 1e-6)")))
}

fn c6_thm3(s: &Suites) -> Outcome {
    let g = s.with_prefix("thm3.identity[");
    let e = g.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok((g.len() == 4 && e < 1e-6, format!("{} characters, max rel {e:.2e} < 1e-6", g.len())))
}

fn c7_mahler(s: &Suites) -> Outcome {
    let a = s.one("mahler.identity[77]")?.rel_error;
    let b = s.one("mahler.identity[55]")?.rel_error;
    let secs = s.seconds(Suite::Mahler);
    Ok((
        a < 1e-6 && b < 1e-6 && secs < 60.0,
        format!("77: rel {a:.2e}, 55: rel {b:.2e} (< 1e-6), {secs:.2}s < 60s"),
    ))
}

fn c8_appendix(s: &Suites) -> Outcome {
    let r = s.one("appendix.petersson_vs_residue")?;
    let positive = r.left.re > 0.0 && r.right.re > 0.0;
    let im = r.left.im.abs().max(r.right.im.abs());
    Ok((
        r.rel_error < 1e-6 && positive && im < 1e-8,
        format!("rel {:.2e} < 1e-6, real parts {:.6} / {:.6}, max |im| {im:.1e} < 1e-8", r.rel_error, r.left.re, r.right.re),
    ))
}

fn c9_convolution() -> Outcome {
    let f = ModularFormData::from_curve(&CurveModel::x1_11(), 2000).map_err(|e| e.to_string())?;
    let chars = enumerate_characters(11).map_err(|e| e.to_string())?;
    let pairs: Vec<(usize, usize)> = (0..chars.len()).flat_map(|i| (0..chars.len()).map(move |j| (i, j))).collect();
    let reports = par::map_slice(&pairs, |&(i, j)| rankin_convolution_check(&f, &chars[i], &chars[j], 2000));
    let mut max_err = 0.0f64;
    let mut mismatches = 0;
    for r in reports {
        let r = r.map_err(|e| e.to_string())?;
        max_err = max_err.max(r.max_abs_error);
        mismatches += r.exact_mismatches.len();
    }
    Ok((
        max_err < 1e-10 && mismatches == 0,
        format!("{} pairs, n <= 2000, max abs {max_err:.2e} < 1e-10, {mismatches} exact mismatches", pairs.len()),
    ))
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

fn kronecker_limits(rng: &mut ChaCha8Rng, c: &SeriesControl) -> Result<f64, String> {
    let mut err = 0.0f64;
    for _ in 0..20 {
        let z = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.8..2.0));
        let eta = dedekind_eta(z, c).map_err(|e| e.to_string())?;
        let first = 2.0 * PI * (EULER_GAMMA - 2f64.ln() - z.im.sqrt().ln() - 2.0 * eta.norm().ln());
        err = err.max((first - zeta_star(0, 0, 1, z, c).map_err(|e| e.to_string())?).abs());

        let n: i64 = [5, 7, 11, 13][rng.gen_range(0..4)];
        let (a, b) = loop {
            let p = (rng.gen_range(0..n), rng.gen_range(0..n));
            if p != (0, 0) {
                break p;
            }
        };
        let nf = n as f64;
        let w = (a as f64 - b as f64 * z) / nf;
        let th = siegel_theta(w, z, c).map_err(|e| e.to_string())?;
        let second = 2.0 * PI * PI * (b * b) as f64 / (nf * nf) * z.im - 2.0 * PI * th.norm().ln();
        err = err.max((second - zeta_star(a, b, n as u64, z, c).map_err(|e| e.to_string())?).abs());
    }
    Ok(err)
}

fn modularity(rng: &mut ChaCha8Rng, c: &SeriesControl) -> Result<f64, String> {
    let mut err = 0.0f64;
    let mut done = 0;
    while done < 50 {
        let g = random_sl2(rng);
        let x = (rng.gen_range(0..11i64), rng.gen_range(0..11i64));
        let z = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.9..1.6));
        let gz = g.apply(z);
        if gz.im < 0.15 {
            continue;
        }
        let lhs = e_star(x, 11, gz, c).map_err(|e| e.to_string())?;
        let rhs = e_star(g.act_row(x, 11), 11, z, c).map_err(|e| e.to_string())?;
        err = err.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        done += 1;
    }
    Ok(err)
}

fn distribution(rng: &mut ChaCha8Rng, c: &SeriesControl, lattices: &[PeriodLattice]) -> Result<f64, String> {
    let mut err = 0.0f64;
    for _ in 0..20 {
        let x: f64 = rng.gen_range(-2.0..2.0);
        for n in 2..7 {
            let sum: f64 = (0..n).map(|k| periodic_bernoulli2((x + k as f64) / n as f64)).sum();
            err = err.max((sum - periodic_bernoulli2(x) / n as f64).abs());
        }
    }
    for l in lattices {
        for _ in 0..5 {
            let (s, t): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            for n in [2i64, 3] {
                let nf = n as f64;
                let lhs = elliptic_dilog(l, l.multiplier(nf * s, nf * t), c).map_err(|e| e.to_string())?;
                let mut sum = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        let m = l.multiplier(s + a as f64 / nf, t + b as f64 / nf);
                        sum += elliptic_dilog(l, m, c).map_err(|e| e.to_string())?;
                    }
                }
                err = err.max((lhs - nf * sum).abs());
            }
        }
    }
    Ok(err)
}

fn unit_degrees(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut err = 0.0f64;
    for n in [2u64, 4, 6, 11, 12, 13, 15, 20, 29] {
        let mut w: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let mean = w.iter().sum::<Complex64>() / n as f64;
        w.iter_mut().for_each(|x| *x -= mean);
        let f = FinDivisor::new(w).map_err(|e| e.to_string())?;
        err = err.max(unit_divisor(&f).map_err(|e| e.to_string())?.degree().norm());
    }
    Ok(err)
}

fn homology() -> Result<(bool, bool), String> {
    let mut dims_ok = true;
    for (n, want) in [(5, 0), (11, 2), (13, 4)] {
        dims_ok &= ManinSpace::new(n).map_err(|e| e.to_string())?.dims().cuspidal == want;
    }
    let t2 = ManinSpace::new(11).and_then(|s| s.t2_cuspidal()).map_err(|e| e.to_string())?;
    let minus_two = -num_rational::BigRational::one() - num_rational::BigRational::one();
    let t2_ok = t2.len() == 2
        && t2.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, x)| if i == j { *x == minus_two } else { x.is_zero() })
        });
    Ok((dims_ok, t2_ok))
}

fn functional_equation(rng: &mut ChaCha8Rng, c: &SeriesControl, forms: &[ModularFormData]) -> Result<f64, String> {
    let mut err = 0.0f64;
    for g in forms {
        let w = g.root_number(c).map_err(|e| e.to_string())?;
        let gbar = g.conjugate();
        for _ in 0..5 {
            let s = Complex64::new(rng.gen_range(0.0..2.0), rng.gen_range(-3.0..3.0));
            let lhs = lambda_value(g, s, c).map_err(|e| e.to_string())?;
            let rhs = lambda_value(&gbar, 2.0 - s, c).map_err(|e| e.to_string())?;
            err = err.max((lhs + w * rhs).norm() / lhs.norm().max(1e-300));
        }
    }
    Ok(err)
}

fn bridge_oracle(rng: &mut ChaCha8Rng, c: &SeriesControl, form: &ModularFormData) -> Result<f64, String> {
    let p = form.level() as i64;
    let table = xi_table_bridge(form, c).map_err(|e| e.to_string())?;
    let mut err = 0.0f64;
    for _ in 0..5 {
        let (u, v) = loop {
            let x = (rng.gen_range(0..p), rng.gen_range(0..p));
            if x != (0, 0) {
                break x;
            }
        };
        let x = SymbolIndex::new(p, u, v).map_err(|e| e.to_string())?;
        let o = period_integral_oracle(form, x, 1e-10, c).map_err(|e| e.to_string())?;
        err = err.max((o - table.value(u, v).map_err(|e| e.to_string())?).norm());
    }
    Ok(err)
}

fn c10_properties() -> Outcome {
    let c = SeriesControl::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let f11 = ModularFormData::from_curve(&CurveModel::x1_11(), 2000).map_err(|e| e.to_string())?;
    let f17 = ModularFormData::from_curve(&CurveModel::conductor_17(), 2000).map_err(|e| e.to_string())?;
    let lattices = [periods(&CurveModel::x1_11()), periods(&CurveModel::conductor_17())]
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut forms = vec![f11.clone(), f17.clone()];
    for chi in enumerate_characters(11).map_err(|e| e.to_string())?.iter().skip(1) {
        forms.push(f11.twist(chi).map_err(|e| e.to_string())?);
    }

    let kron = kronecker_limits(&mut rng, &c)?;
    let modular = modularity(&mut rng, &c)?;
    let dist = distribution(&mut rng, &c, &lattices)?;
    let degree = unit_degrees(&mut rng)?;
    let (dims_ok, t2_ok) = homology()?;
    let fe = functional_equation(&mut rng, &c, &forms)?;
    let xi = bridge_oracle(&mut rng, &c, &f11)?.max(bridge_oracle(&mut rng, &c, &f17)?);

    let pass = kron < 1e-10 && modular < 1e-9 && dist < 1e-10 && degree < 1e-12 && dims_ok && t2_ok && fe < 1e-10 && xi < 1e-7;
    Ok((
        pass,
        format!(
            "kronecker {kron:.1e}, modularity {modular:.1e}, distribution {dist:.1e}, unit degree {degree:.1e}, \
             dims {}, T2 {}, functional equation {fe:.1e}, xi oracle {xi:.1e}",
            if dims_ok { "ok" } else { "wrong" },
            if t2_ok { "-2" } else { "wrong" },
        ),
    ))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let suites = VerifyConfig::for_level(11).map_err(|e| e.to_string()).and_then(|cfg| Suites::run(&cfg));
    let from_suites = |f: fn(&Suites) -> Outcome| -> Outcome { suites.as_ref().map_err(Clone::clone).and_then(f) };
    let criteria: Vec<(&str, Outcome)> = vec![
        ("L(E,2) from the dilogarithm at the 5-torsion point", from_suites(c1_l_value)),
        ("exotic relation D_E(2P) = 3/2 D_E(P)", from_suites(c2_exotic)),
        ("dilogarithm sums against twisted L-values, level 11", from_suites(c3_thm8)),
        ("Eisenstein arc coefficients against L-value products", from_suites(c4_thm1)),
        ("L(E,2) from the arc coefficients, with and without the residue", from_suites(c5_thm2)),
        ("cuspidal cycle pairing", from_suites(c6_thm3)),
        ("Mahler measure identities", from_suites(c7_mahler)),
        ("Petersson norm from periods against the Rankin residue", from_suites(c8_appendix)),
        ("Dirichlet coefficients of the twisted convolution", c9_convolution()),
        ("structural property suites", c10_properties()),
    ];
    let mut failures = 0;
    for (i, (name, outcome)) in criteria.iter().enumerate() {
        let (pass, detail) = match outcome {
            Ok((p, d)) => (*p, d.clone()),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!("{} {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
