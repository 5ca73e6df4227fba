//! Divisors of modular units supported on the cusps of `X₁(N)`.
//!
//! For `f : Z/NZ → C` of degree zero the unit `u_f` satisfies
//! `log|u_f| = E*_f/π`; its order at the cusp `P = [u, v]` is
//! `−(1/(N·(u, N))) Σ_{a,b} f̂(au + bv)·B̄₂(b/N)`. Characters and their Fourier
//! transforms have closed forms, implemented separately so they can be
//! checked against the general formula.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::characters::{euler_phi, gauss_sum, l_chi_2_over_pi2, DirichletCharacter};
use crate::eisenstein::FinDivisor;
use crate::error::{invalid, Error, Result};
use crate::modsym::{CuspClass, CuspKind, CuspTable};
use crate::specialfns::periodic_bernoulli2_frac;

/// Complex divisor on the cusps of `X₁(N)`, one coefficient per cusp class.
#[derive(Debug, Clone)]
pub struct CuspDivisor {
    table: CuspTable,
    coeffs: Vec<Complex64>,
}

/// One row of a serialised divisor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspDivisorEntry {
    pub u: i64,
    pub v: i64,
    pub gcd: i64,
    pub kind: CuspKind,
    pub re: f64,
    pub im: f64,
}

impl CuspDivisor {
    /// The zero divisor at level `N`.
    pub fn zero(level: i64) -> Result<Self> {
        let table = CuspTable::new(level)?;
        let coeffs = vec![Complex64::new(0.0, 0.0); table.len()];
        Ok(Self { table, coeffs })
    }

    /// Level `N`.
    pub fn level(&self) -> i64 {
        self.table.level
    }

    /// Cusp classes, in the order of [`CuspDivisor::coefficients`].
    pub fn cusps(&self) -> &[CuspClass] {
        &self.table.classes
    }

    /// Coefficients, one per cusp class.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at the class of `(u, v)`.
    pub fn at(&self, u: i64, v: i64) -> Result<Complex64> {
        self.table
            .class_of(u, v)
            .map(|i| self.coeffs[i])
            .ok_or_else(|| Error::InvalidInput(format!("({u}, {v}) has not order {} in (Z/NZ)²", self.level())))
    }

    /// Sum of the coefficients.
    pub fn degree(&self) -> Complex64 {
        self.coeffs.iter().sum()
    }

    /// `c·self + d·other`.
    pub fn combine(&self, c: Complex64, other: &Self, d: Complex64) -> Result<Self> {
        if other.level() != self.level() {
            return invalid("divisors live on different levels");
        }
        Ok(Self {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| c * a + d * b).collect(),
        })
    }

    /// `c·self`.
    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().map(|a| c * a).collect(),
        }
    }

    /// Largest coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if other.level() != self.level() {
            return invalid("divisors live on different levels");
        }
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Pullback by the diamond operator: the coefficient at `P` becomes the
    /// coefficient at `⟨d⟩P = [du, dv]`.
    pub fn pullback_diamond(&self, d: i64) -> Result<Self> {
        let n = self.level();
        if d.gcd(&n) != 1 {
            return invalid(format!("{d} is not a unit modulo {n}"));
        }
        let coeffs = self
            .table
            .classes
            .iter()
            .map(|c| self.at(d * c.u, d * c.v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            table: self.table.clone(),
            coeffs,
        })
    }

    /// Coefficients on `P_v = [0, v]` for `v = 1, …, ⌊N/2⌋`.
    pub fn on_p_cusps(&self) -> Result<Vec<Complex64>> {
        let n = self.level();
        (1..=n / 2).filter(|v| v.gcd(&n) == 1).map(|v| self.at(0, v)).collect()
    }

    /// Rows for serialisation.
    pub fn entries(&self) -> Vec<CuspDivisorEntry> {
        self.table
            .classes
            .iter()
            .zip(&self.coeffs)
            .map(|(c, z)| CuspDivisorEntry {
                u: c.u,
                v: c.v,
                gcd: c.gcd,
                kind: c.kind,
                re: z.re,
                im: z.im,
            })
            .collect()
    }

    fn from_fn<F: Fn(&CuspClass) -> Result<Complex64>>(level: i64, f: F) -> Result<Self> {
        let table = CuspTable::new(level)?;
        let coeffs = table.classes.iter().map(&f).collect::<Result<Vec<_>>>()?;
        Ok(Self { table, coeffs })
    }
}

/// Tolerance on `|Σ f|` for accepting a finite divisor as degree zero.
pub const DEGREE_TOL: f64 = 1e-12;

fn check_degree_zero(f: &FinDivisor) -> Result<()> {
    let scale = f.weights().iter().map(|w| w.norm()).fold(1.0, f64::max);
    let deg = f.degree();
    if deg.norm() > DEGREE_TOL * scale {
        return invalid(format!("the unit u_f needs Σf = 0, got {deg}"));
    }
    Ok(())
}

/// `ord_{[u,v]}(u_f)` evaluated on the given representative.
pub fn unit_order_at(f: &FinDivisor, u: i64, v: i64) -> Result<Complex64> {
    check_degree_zero(f)?;
    let n = f.modulus() as i64;
    let g = u.gcd(&v).gcd(&n);
    if n == 1 || g != 1 {
        return invalid(format!("({u}, {v}) has not order {n} in (Z/NZ)²"));
    }
    Ok(order_with_transform(&f.fourier(), n, u, v))
}

/// Ratio of the true local parameter exponent to `(u, N)/N`. The only irregular
/// cusp of any `Γ₁(N)` is `1/2` at `N = 4`: there `−T` fixes it, weight-zero
/// functions are `q`-periodic and orders halve.
fn irregular_factor(n: i64, d: i64) -> f64 {
    if n == 4 && d == 2 {
        0.5
    } else {
        1.0
    }
}

fn order_with_transform(fhat: &FinDivisor, n: i64, u: i64, v: i64) -> Complex64 {
    let d = u.gcd(&n);
    let mut s = Complex64::new(0.0, 0.0);
    for b in 0..n {
        let bern = periodic_bernoulli2_frac(b, n);
        let mut inner = Complex64::new(0.0, 0.0);
        for a in 0..n {
            inner += fhat.weight((a * u + b * v).rem_euclid(n));
        }
        s += inner * bern;
    }
    -s * irregular_factor(n, d) / (n * d) as f64
}

/// Divisor of `u_f` for a degree-zero `f : Z/NZ → C`, by the general formula.
pub fn unit_divisor(f: &FinDivisor) -> Result<CuspDivisor> {
    check_degree_zero(f)?;
    let n = f.modulus() as i64;
    if n == 1 {
        return invalid("X₁(1) has a single cusp and no nonconstant units");
    }
    let fhat = f.fourier();
    let table = CuspTable::new(n)?;
    let coeffs = crate::par::map_slice(&table.classes, |c| order_with_transform(&fhat, n, c.u, c.v));
    Ok(CuspDivisor { table, coeffs })
}

fn check_even_nontrivial(chi: &DirichletCharacter) -> Result<()> {
    if chi.is_trivial() {
        return invalid("u_χ needs a nontrivial character");
    }
    if !chi.is_even() {
        return invalid("u_χ needs an even character");
    }
    Ok(())
}

/// `L(χ, 2)/π²` for any nontrivial character, from the primitive character
/// inducing it and the Euler factors at the primes dividing `N` but not the conductor.
fn l_chi_2_over_pi2_any(chi: &DirichletCharacter) -> Result<Complex64> {
    if chi.is_primitive() {
        return l_chi_2_over_pi2(chi);
    }
    let n = chi.modulus();
    let f = chi.conductor();
    let prim = primitive_inducing(chi)?;
    let mut val = l_chi_2_over_pi2(&prim)?;
    for (p, _) in crate::characters::factorize(n) {
        if f % p != 0 {
            val *= Complex64::new(1.0, 0.0) - prim.value(p as i64) / (p * p) as f64;
        }
    }
    Ok(val)
}

fn primitive_inducing(chi: &DirichletCharacter) -> Result<DirichletCharacter> {
    let f = chi.conductor();
    induced_character(chi, f)
}

/// The character modulo `d` (with `N_χ | d | N`) through which `χ` factors.
fn induced_character(chi: &DirichletCharacter, d: u64) -> Result<DirichletCharacter> {
    let n = chi.modulus();
    if n % d != 0 || d % chi.conductor() != 0 {
        return invalid(format!("χ does not factor through (Z/{d}Z)*"));
    }
    crate::characters::enumerate_characters(d)?
        .into_iter()
        .find(|c| {
            (1..n as i64)
                .filter(|&a| a.gcd(&(n as i64)) == 1)
                .all(|a| (c.value(a) - chi.value(a)).norm() < 1e-12)
        })
        .ok_or_else(|| Error::Inconsistent {
            what: "character induction",
            detail: format!("no character modulo {d} induces {}", chi.label()),
        })
}

/// `div u_χ = −(L(χ, 2)/π²) Σ_{v ∈ (Z/NZ)*/±1} χ̄(v)·P_v` for even nontrivial `χ`.
pub fn unit_divisor_chi(chi: &DirichletCharacter) -> Result<CuspDivisor> {
    check_even_nontrivial(chi)?;
    let n = chi.modulus() as i64;
    let l = l_chi_2_over_pi2_any(chi)?;
    CuspDivisor::from_fn(n, |c| {
        Ok(if c.u == 0 {
            -l * chi.value(c.v).conj()
        } else {
            Complex64::new(0.0, 0.0)
        })
    })
}

/// `div u_χ̂` for even `χ` modulo `N > 1`. With `d = (u, N)` the order at
/// `[u, v]` vanishes unless `N_χ | d`, in which case it is
/// `−((φ(N)/N)/(φ(d)/d))·χ_d(v)·Σ_{β ∈ (Z/dZ)*} B̄₂(β/d)·χ_d(β)`.
pub fn unit_divisor_chihat(chi: &DirichletCharacter) -> Result<CuspDivisor> {
    let n = chi.modulus() as i64;
    if n <= 1 {
        return invalid("u_χ̂ needs N > 1");
    }
    if !chi.is_even() {
        return invalid("u_χ̂ needs an even character");
    }
    let nc = chi.conductor() as i64;
    let phi_n = euler_phi(n as u64) as f64 / n as f64;
    CuspDivisor::from_fn(n, |c| {
        let d = c.u.gcd(&n);
        if d % nc != 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let chi_d = induced_character(chi, d as u64)?;
        let phi_d = euler_phi(d as u64) as f64 / d as f64;
        let s: Complex64 = (0..d)
            .filter(|b| b.gcd(&d) == 1)
            .map(|b| chi_d.value(b) * periodic_bernoulli2_frac(b, d))
            .sum();
        Ok(-(phi_n / phi_d) * irregular_factor(n, d) * chi_d.value(c.v.rem_euclid(d)) * s)
    })
}

/// The two divisor identities for the plane model of `X₁(13)` with
/// functions `x`, `y` supported on the cusps `P_1, …, P_6`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct X113Report {
    /// `div y` on `P_1, …, P_6`.
    pub div_y: [i64; 6],
    /// `div x` on `P_1, …, P_6`.
    pub div_x: [i64; 6],
    /// `div u_{ε³}` on `P_1, …, P_6`.
    pub div_u_eps3: Vec<Complex64>,
    /// Least-squares constant `c` with `div u_{ε³} = c·div y`.
    pub eps3_over_y: Complex64,
    /// Expected `−4√13/13²`.
    pub eps3_over_y_expected: f64,
    /// `max |div u_{ε³} − c·div y|`.
    pub eps3_proportionality_residual: f64,
    /// `c·(−13√13/4)`, which must be 1 for `y ⊗ 1 = u_{ε³} ⊗ (−13√13/4)`.
    pub y_scalar_check: Complex64,
    /// `(13/12)((1 + ζ₆)·div u_{ε̂²} + (2 − ζ₆)·div u_{ε̄̂²})` on `P_1, …, P_6`,
    /// where `ε̂²` is the Fourier transform of `ε²`.
    pub div_x_from_hats: Vec<Complex64>,
    /// The same combination with the two scalars exchanged; not equal to `div x`.
    pub div_x_from_hats_exchanged: Vec<Complex64>,
    /// `(13/12)((2 − ζ₆)·τ(ε̄²)·div u_{ε²} + (1 + ζ₆)·τ(ε²)·div u_{ε̄²})`.
    pub div_x_from_gauss_sums: Vec<Complex64>,
    /// `((1 − 2ζ₆)/3)(div u_{ε²}/(L(ε², 2)/π²) − div u_{ε̄²}/(L(ε̄², 2)/π²))`.
    pub div_x_from_units: Vec<Complex64>,
    pub err_div_x_from_hats: f64,
    pub err_div_x_from_hats_exchanged: f64,
    pub err_div_x_from_gauss_sums: f64,
    pub err_div_x_from_units: f64,
}

impl X113Report {
    /// True when the proportionality constant, the scalar identity and the
    /// printed `div x` combination all hold to `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        (self.eps3_over_y.re - self.eps3_over_y_expected).abs() <= tol
            && self.eps3_over_y.im.abs() <= tol
            && self.eps3_proportionality_residual <= tol
            && (self.y_scalar_check - 1.0).norm() <= tol
            && self.err_div_x_from_hats <= tol
            && self.err_div_x_from_gauss_sums <= tol
            && self.err_div_x_from_units <= tol
    }
}

/// The character `ε` modulo 13 with `ε(2) = ζ₆`.
pub fn epsilon_13() -> Result<DirichletCharacter> {
    DirichletCharacter::from_label("13:g=2,zeta6^1")
}

/// Rebuilds `div x` and `div y` on `X₁(13)` from the unit divisors of the even
/// characters modulo 13.
pub fn reconstruct_x1_13_units() -> Result<X113Report> {
    const DIV_Y: [i64; 6] = [1, -1, 1, 1, -1, -1];
    const DIV_X: [i64; 6] = [0, 1, 1, -1, 0, -1];
    let eps = epsilon_13()?;
    let eps2 = eps.mul(&eps)?;
    let eps3 = eps2.mul(&eps)?;
    let eps2b = eps2.conj();
    let z6 = Complex64::from_polar(1.0, PI / 3.0);
    let one = Complex64::new(1.0, 0.0);

    let u3 = unit_divisor_chi(&eps3)?.on_p_cusps()?;
    let yy: f64 = DIV_Y.iter().map(|&k| (k * k) as f64).sum();
    let c: Complex64 = u3.iter().zip(DIV_Y).map(|(a, k)| a * k as f64).sum::<Complex64>() / yy;
    let resid = u3.iter().zip(DIV_Y).map(|(a, k)| (a - c * k as f64).norm()).fold(0.0, f64::max);
    let expected = -4.0 * 13f64.sqrt() / 169.0;
    let y_scalar = c * (-13.0 * 13f64.sqrt() / 4.0);

    let h2 = unit_divisor_chihat(&eps2)?;
    let h2b = unit_divisor_chihat(&eps2b)?;
    let k = 13.0 / 12.0;
    let from_hats = h2.combine(k * (one + z6), &h2b, k * (2.0 * one - z6))?.on_p_cusps()?;
    let exchanged = h2.combine(k * (2.0 * one - z6), &h2b, k * (one + z6))?.on_p_cusps()?;
    let u2 = unit_divisor_chi(&eps2)?;
    let u2b = unit_divisor_chi(&eps2b)?;
    let from_gauss = u2
        .combine(k * (2.0 * one - z6) * gauss_sum(&eps2b), &u2b, k * (one + z6) * gauss_sum(&eps2))?
        .on_p_cusps()?;
    let l2 = l_chi_2_over_pi2(&eps2)?;
    let l2b = l_chi_2_over_pi2(&eps2b)?;
    let pre = (one - 2.0 * z6) / 3.0;
    let from_units = u2.combine(pre / l2, &u2b, -pre / l2b)?.on_p_cusps()?;
    let err = |v: &[Complex64]| v.iter().zip(DIV_X).map(|(a, k)| (a - k as f64).norm()).fold(0.0, f64::max);
    Ok(X113Report {
        div_y: DIV_Y,
        div_x: DIV_X,
        err_div_x_from_hats: err(&from_hats),
        err_div_x_from_hats_exchanged: err(&exchanged),
        err_div_x_from_gauss_sums: err(&from_gauss),
        err_div_x_from_units: err(&from_units),
        div_u_eps3: u3,
        eps3_over_y: c,
        eps3_over_y_expected: expected,
        eps3_proportionality_residual: resid,
        y_scalar_check: y_scalar,
        div_x_from_hats: from_hats,
        div_x_from_hats_exchanged: exchanged,
        div_x_from_gauss_sums: from_gauss,
        div_x_from_units: from_units,
    })
}
