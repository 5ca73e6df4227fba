//! Real-analytic Eisenstein series `ζ*_{a,b}`, `E*_x` and `E*_f` of level
//! `N`, the one-form `η(l,m)` and its integrals along geodesics.
//!
//! All series are evaluated through their Fourier expansions in
//! `q_N = e^{2πiz/N}`. For the double series
//! `S_{a,b} = Σ_{k,m≥1} ([m≡b]ζ^{−ka} + [m≡−b]ζ^{ka})·q_N^{km}/k`
//! the expansions read
//!
//! * `ζ*_{a,b} = 2π²B̄₂(b/N)·y + C_{a,b} + 2π·Re S_{a,b}`,
//! * `C_{a,b} = 0` for `b ≠ 0`, `C_{a,0} = −2π log|1−ζ^a|` for `a ≠ 0`,
//!   `C_{0,0} = −π log y + 2π(γ − log 2)`,
//!
//! and `E*_{(u,v)} = N^{−2} Σ_{a,b} e^{−2πi(au+bv)/N} ζ*_{a,b}`. Since every
//! `E*_x` is real, `∂̄E*_x = conj(∂E*_x)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::characters::{DirichletCharacter, FiniteMap};
use crate::error::{invalid, Error, Result};
use crate::par;
use crate::specialfns::{periodic_bernoulli2_frac, GaussLegendre, SeriesControl, EULER_GAMMA};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

// ---------------------------------------------------------------------------
// Finite divisors
// ---------------------------------------------------------------------------

/// Complex-weighted function on `Z/NZ` indexing Eisenstein series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinDivisor {
    map: FiniteMap,
}

impl FinDivisor {
    /// Builds a divisor from its weights at `0..N`.
    pub fn new(weights: Vec<Complex64>) -> Result<Self> {
        Ok(Self {
            map: FiniteMap::new(weights)?,
        })
    }

    /// Divisor with real weights.
    pub fn from_real(weights: &[f64]) -> Result<Self> {
        Ok(Self {
            map: FiniteMap::from_real(weights)?,
        })
    }

    /// Wraps a finite map.
    pub fn from_map(map: FiniteMap) -> Self {
        Self { map }
    }

    /// The point divisor `[v]`.
    pub fn delta(n: u64, v: i64) -> Result<Self> {
        Ok(Self {
            map: FiniteMap::delta(n, v)?,
        })
    }

    /// Weights `χ(v)`.
    pub fn from_character(chi: &DirichletCharacter) -> Self {
        Self {
            map: FiniteMap::from_character(chi),
        }
    }

    /// The modulus `N`.
    pub fn modulus(&self) -> u64 {
        self.map.modulus()
    }

    /// Weight at `v`.
    pub fn weight(&self, v: i64) -> Complex64 {
        self.map.at(v)
    }

    /// Weight table.
    pub fn weights(&self) -> &[Complex64] {
        self.map.values()
    }

    /// Underlying finite map.
    pub fn as_map(&self) -> &FiniteMap {
        &self.map
    }

    /// Degree `Σ_v weight(v)`.
    pub fn degree(&self) -> Complex64 {
        self.map.sum()
    }

    /// Even part `v ↦ (l(v) + l(−v))/2`.
    pub fn even_part(&self) -> Self {
        let r = self.map.reflect();
        Self {
            map: self
                .map
                .linear_combination(Complex64::new(0.5, 0.0), &r, Complex64::new(0.5, 0.0))
                .expect("same modulus"),
        }
    }

    /// Odd part `v ↦ (l(v) − l(−v))/2`.
    pub fn odd_part(&self) -> Self {
        let r = self.map.reflect();
        Self {
            map: self
                .map
                .linear_combination(Complex64::new(0.5, 0.0), &r, Complex64::new(-0.5, 0.0))
                .expect("same modulus"),
        }
    }

    /// `c·self + d·other`.
    pub fn combine(&self, c: Complex64, other: &Self, d: Complex64) -> Result<Self> {
        Ok(Self {
            map: self.map.linear_combination(c, &other.map, d)?,
        })
    }

    /// Fourier transform of the weights.
    pub fn fourier(&self) -> Self {
        Self {
            map: self.map.fourier_transform(),
        }
    }

    /// `D(l, m) = (deg m)·l − (deg l)·m`.
    pub fn commutator_divisor(l: &Self, m: &Self) -> Result<Self> {
        l.combine(m.degree(), m, -l.degree())
    }
}

// ---------------------------------------------------------------------------
// SL2(Z)
// ---------------------------------------------------------------------------

/// Integer matrix `[[a, b], [c, d]]` of determinant one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnimodularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl UnimodularMatrix {
    /// Checked constructor.
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c != 1 {
            return invalid(format!("matrix [[{a},{b}],[{c},{d}]] has determinant {}", a * d - b * c));
        }
        Ok(Self { a, b, c, d })
    }

    /// Identity.
    pub const fn identity() -> Self {
        Self { a: 1, b: 0, c: 0, d: 1 }
    }

    /// `σ = [[0, −1], [1, 0]]`.
    pub const fn sigma() -> Self {
        Self { a: 0, b: -1, c: 1, d: 0 }
    }

    /// `τ = [[0, −1], [1, −1]]`.
    pub const fn tau() -> Self {
        Self { a: 0, b: -1, c: 1, d: -1 }
    }

    /// `T = [[1, 1], [0, 1]]`.
    pub const fn translation() -> Self {
        Self { a: 1, b: 1, c: 0, d: 1 }
    }

    /// `g_v = [[0, −1], [1, v]]`.
    pub const fn g_v(v: i64) -> Self {
        Self { a: 0, b: -1, c: 1, d: v }
    }

    /// Canonical lift of a bottom row `(u, v)` of order `N` in `(Z/NZ)²`.
    ///
    /// Rows `(0, ±1)` map to `±I`. Otherwise `c` is the residue of `u` in
    /// `1..=N` and `d` the smallest non-negative lift of `v` coprime to `c`;
    /// `(a, b)` comes from the extended Euclidean algorithm.
    pub fn from_bottom_row(u: i64, v: i64, n: i64) -> Result<Self> {
        if n <= 0 {
            return invalid("level must be positive");
        }
        let u0 = u.rem_euclid(n);
        let v0 = v.rem_euclid(n);
        if u0.gcd(&v0).gcd(&n) != 1 {
            return invalid(format!("({u}, {v}) does not have order {n} in (Z/{n}Z)²"));
        }
        if u0 == 0 && v0 == 1 % n {
            return Ok(Self::identity());
        }
        if u0 == 0 && v0 == n - 1 {
            return Self::new(-1, 0, 0, -1);
        }
        let c = if u0 == 0 { n } else { u0 };
        let mut d = v0;
        // Search d ≡ v (mod N) with gcd(c, d) = 1.
        let mut k = 0;
        while c.gcd(&d) != 1 {
            k += 1;
            d = v0 + k * n;
            if k > 10_000 {
                return invalid("no coprime lift found");
            }
        }
        // a·d − b·c = 1
        let e = d.extended_gcd(&c);
        let (mut a, mut b) = (e.x, -e.y);
        // Normalize sign when gcd came out as −1.
        if e.gcd == -1 {
            a = -a;
            b = -b;
        }
        Self::new(a, b, c, d)
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// Inverse matrix.
    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// Möbius action `z ↦ (az + b)/(cz + d)`.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a as f64 * z + self.b as f64) / (self.c as f64 * z + self.d as f64)
    }

    /// Right action of the matrix on a row vector modulo `N`.
    pub fn act_row(&self, x: (i64, i64), n: i64) -> (i64, i64) {
        (
            (x.0 * self.a + x.1 * self.c).rem_euclid(n),
            (x.0 * self.b + x.1 * self.d).rem_euclid(n),
        )
    }
}

// ---------------------------------------------------------------------------
// One-form values
// ---------------------------------------------------------------------------

/// A complex one-form `dz_coeff·dz + dzbar_coeff·dz̄` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneFormValue {
    pub z: Complex64,
    pub dz: Complex64,
    pub dzbar: Complex64,
}

impl OneFormValue {
    /// Pairing with a tangent vector `t` (as a complex number).
    pub fn pair(&self, t: Complex64) -> Complex64 {
        self.dz * t + self.dzbar * t.conj()
    }
}

// ---------------------------------------------------------------------------
// Fourier expansions
// ---------------------------------------------------------------------------

fn check_z(z: Complex64) -> Result<()> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return invalid(format!("Eisenstein series need Im z > 0, got {z}"));
    }
    Ok(())
}

/// Truncation index for the `q_N`-expansion at height `y`.
///
/// Coefficients of `S` and of its `z`-derivative are bounded by
/// `2(1 + log r)` and `2(1 + log r)·2πr/N`; the index is the first `R` with
/// the geometric tail below `abs_tol`.
pub fn truncation_index(n: u64, y: f64, ctl: &SeriesControl) -> Result<usize> {
    let ratio = (-2.0 * PI * y / n as f64).exp();
    let mut r = 1usize;
    loop {
        let rf = r as f64;
        let coeff = 2.0 * (1.0 + rf.ln()) * (1.0 + 2.0 * PI * rf / n as f64);
        let tail = coeff * ratio.powf(rf) / (1.0 - ratio).powi(2);
        if tail < ctl.abs_tol {
            return Ok(r);
        }
        r += 1;
        if r > ctl.max_terms {
            return Err(Error::TruncationCap {
                what: "Eisenstein q-expansion",
                cap: ctl.max_terms,
            });
        }
    }
}

fn roots_of_unity(n: u64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// Values and `z`-derivatives of all `ζ*_{a,b}(z)`, indexed by `a·N + b`.
#[derive(Debug, Clone)]
pub struct ZetaTable {
    pub n: u64,
    pub z: Complex64,
    pub values: Vec<f64>,
    pub dz: Vec<Complex64>,
    /// Truncation index used for the `q_N`-expansion.
    pub terms: usize,
}

fn constant_term(a: u64, b: u64, n: u64, y: f64) -> (f64, Complex64) {
    if b != 0 {
        return (0.0, czero());
    }
    if a != 0 {
        let w = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 2.0 * PI * a as f64 / n as f64);
        return (-2.0 * PI * w.norm().ln(), czero());
    }
    (
        -PI * y.ln() + 2.0 * PI * (EULER_GAMMA - 2f64.ln()),
        Complex64::new(0.0, PI / (2.0 * y)),
    )
}

/// All `ζ*_{a,b}` and `∂_z ζ*_{a,b}` at `z`.
pub fn zeta_star_table(n: u64, z: Complex64, ctl: &SeriesControl) -> Result<ZetaTable> {
    check_z(z)?;
    if n == 0 {
        return invalid("level must be positive");
    }
    let nu = n as usize;
    let y = z.im;
    let r_max = truncation_index(n, y, ctl)?;
    let roots = roots_of_unity(n);
    let qn = (2.0 * PI * I * z / n as f64).exp();
    let mut qpow = Vec::with_capacity(r_max + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=r_max {
        qpow.push(acc);
        acc *= qn;
    }
    let mut s = vec![czero(); nu * nu];
    let mut ds = vec![czero(); nu * nu];
    let deriv_unit = 2.0 * PI * I / n as f64;
    for k in 1..=r_max {
        let mut m = 1;
        while k * m <= r_max {
            let r = k * m;
            let coef = qpow[r] / k as f64;
            let dcoef = coef * deriv_unit * r as f64;
            let b1 = m % nu;
            let b2 = (nu - b1) % nu;
            for a in 0..nu {
                let e = (k * a) % nu;
                let minus = roots[(nu - e) % nu];
                let plus = roots[e];
                s[a * nu + b1] += minus * coef;
                ds[a * nu + b1] += minus * dcoef;
                s[a * nu + b2] += plus * coef;
                ds[a * nu + b2] += plus * dcoef;
            }
            m += 1;
        }
    }
    let mut values = vec![0.0; nu * nu];
    let mut dz = vec![czero(); nu * nu];
    for a in 0..nu {
        for b in 0..nu {
            let idx = a * nu + b;
            let bern = periodic_bernoulli2_frac(b as i64, n as i64);
            let (c, dc) = constant_term(a as u64, b as u64, n, y);
            values[idx] = 2.0 * PI * PI * bern * y + c + 2.0 * PI * s[idx].re;
            dz[idx] = Complex64::new(0.0, -PI * PI * bern) + dc + PI * ds[idx];
        }
    }
    Ok(ZetaTable {
        n,
        z,
        values,
        dz,
        terms: r_max,
    })
}

/// `ζ*_{a,b}(z)` from its Fourier expansion.
pub fn zeta_star(a: i64, b: i64, n: u64, z: Complex64, ctl: &SeriesControl) -> Result<f64> {
    Ok(zeta_star_with_derivative(a, b, n, z, ctl)?.0)
}

/// `ζ*_{a,b}(z)` and `∂_z ζ*_{a,b}(z)`.
pub fn zeta_star_with_derivative(
    a: i64,
    b: i64,
    n: u64,
    z: Complex64,
    ctl: &SeriesControl,
) -> Result<(f64, Complex64)> {
    check_z(z)?;
    if n == 0 {
        return invalid("level must be positive");
    }
    let ni = n as i64;
    let a = a.rem_euclid(ni) as usize;
    let b = b.rem_euclid(ni) as usize;
    let nu = n as usize;
    let y = z.im;
    let r_max = truncation_index(n, y, ctl)?;
    let roots = roots_of_unity(n);
    let qn = (2.0 * PI * I * z / n as f64).exp();
    let deriv_unit = 2.0 * PI * I / n as f64;
    let mut s = czero();
    let mut ds = czero();
    for k in 1..=r_max {
        let e = (k * a) % nu;
        let mut m = 1;
        while k * m <= r_max {
            let mut w = czero();
            if m % nu == b {
                w += roots[(nu - e) % nu];
            }
            if (nu - m % nu) % nu == b {
                w += roots[e];
            }
            if w != czero() {
                let r = k * m;
                let term = w * qn.powu(r as u32) / k as f64;
                s += term;
                ds += term * deriv_unit * r as f64;
            }
            m += 1;
        }
    }
    let bern = periodic_bernoulli2_frac(b as i64, ni);
    let (c, dc) = constant_term(a as u64, b as u64, n, y);
    Ok((
        2.0 * PI * PI * bern * y + c + 2.0 * PI * s.re,
        Complex64::new(0.0, -PI * PI * bern) + dc + PI * ds,
    ))
}

/// Values and `z`-derivatives of every `E*_x(z)`, indexed by `u·N + v`.
#[derive(Debug, Clone)]
pub struct EStarTable {
    pub n: u64,
    pub z: Complex64,
    pub values: Vec<f64>,
    pub dz: Vec<Complex64>,
    pub terms: usize,
}

impl EStarTable {
    /// Index of `(u, v)`.
    pub fn index(&self, u: i64, v: i64) -> usize {
        let n = self.n as i64;
        (u.rem_euclid(n) * n + v.rem_euclid(n)) as usize
    }

    /// `E*_{(u,v)}(z)`.
    pub fn value(&self, u: i64, v: i64) -> f64 {
        self.values[self.index(u, v)]
    }

    /// `∂_z E*_{(u,v)}(z)`.
    pub fn derivative(&self, u: i64, v: i64) -> Complex64 {
        self.dz[self.index(u, v)]
    }
}

/// Every `E*_x(z)` and `∂_z E*_x(z)` through a two-dimensional discrete
/// Fourier transform of the `ζ*` table.
pub fn e_star_table(n: u64, z: Complex64, ctl: &SeriesControl) -> Result<EStarTable> {
    let zt = zeta_star_table(n, z, ctl)?;
    let nu = n as usize;
    let roots = roots_of_unity(n);
    let inv = 1.0 / (n as f64 * n as f64);
    // First transform over b, then over a.
    let mut half = vec![czero(); nu * nu];
    let mut dhalf = vec![czero(); nu * nu];
    for a in 0..nu {
        for v in 0..nu {
            let mut acc = czero();
            let mut dacc = czero();
            for b in 0..nu {
                let w = roots[(nu - (b * v) % nu) % nu];
                acc += w * zt.values[a * nu + b];
                dacc += w * zt.dz[a * nu + b];
            }
            half[a * nu + v] = acc;
            dhalf[a * nu + v] = dacc;
        }
    }
    let mut values = vec![0.0; nu * nu];
    let mut dz = vec![czero(); nu * nu];
    for u in 0..nu {
        for v in 0..nu {
            let mut acc = czero();
            let mut dacc = czero();
            for a in 0..nu {
                let w = roots[(nu - (a * u) % nu) % nu];
                acc += w * half[a * nu + v];
                dacc += w * dhalf[a * nu + v];
            }
            values[u * nu + v] = acc.re * inv;
            dz[u * nu + v] = dacc * inv;
        }
    }
    Ok(EStarTable {
        n,
        z,
        values,
        dz,
        terms: zt.terms,
    })
}

/// `E*_x(z)` for `x = (u, v)`.
pub fn e_star(x: (i64, i64), n: u64, z: Complex64, ctl: &SeriesControl) -> Result<f64> {
    check_z(z)?;
    if n == 0 {
        return invalid("level must be positive");
    }
    let ni = n as i64;
    let mut acc = czero();
    for a in 0..ni {
        for b in 0..ni {
            let phase = Complex64::from_polar(1.0, -2.0 * PI * ((a * x.0 + b * x.1).rem_euclid(ni)) as f64 / n as f64);
            acc += phase * zeta_star(a, b, n, z, ctl)?;
        }
    }
    Ok(acc.re / (n as f64 * n as f64))
}

/// `E*_f(z) = Σ_v f(v)·E*_{(0,v)}(z)`.
pub fn e_star_f(f: &FinDivisor, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    let t = e_star_table(f.modulus(), z, ctl)?;
    Ok((0..f.modulus() as i64).map(|v| f.weight(v) * t.value(0, v)).sum())
}

/// `E*_f(z)` for a degree-zero `f`, from the expansion in `q = e^{2πiz}`
/// with coefficients built from `f̂` and the slope
/// `Σ'_{n∈Z} f(n)/n²` evaluated by the cosecant identity
/// `Σ_{n≡v (N)} n^{−2} = π²/(N² sin²(πv/N))`.
pub fn e_star_f_fourier(f: &FinDivisor, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    check_z(z)?;
    let n = f.modulus();
    let scale = f.weights().iter().map(|w| w.norm()).fold(0.0, f64::max).max(1.0);
    if f.degree().norm() > 1e-12 * scale {
        return invalid("the q-expansion form needs a degree-zero divisor");
    }
    let nf = n as f64;
    let ni = n as i64;
    let mut slope = f.weight(0) * (PI * PI / (3.0 * nf * nf));
    for v in 1..ni {
        let s = (PI * v as f64 / nf).sin();
        slope += f.weight(v) * (PI * PI / (nf * nf * s * s));
    }
    let fh = f.fourier();
    let q = (2.0 * PI * I * z).exp();
    let qn = q.norm();
    let mut sum = czero();
    let mut qr = Complex64::new(1.0, 0.0);
    let mut converged = false;
    for r in 1..=ctl.max_terms {
        qr *= q;
        let mut c = czero();
        for k in 1..=r {
            if r % k == 0 {
                c += k as f64 * (fh.weight(k as i64) + fh.weight(-(k as i64)));
            }
        }
        let term = c / r as f64 * (qr + qr.conj());
        sum += term;
        // Coefficients grow at most like 2σ(r)/r·max|f̂| ≤ 2(1+log r)·Σ|f|.
        let bound = 2.0 * (1.0 + (r as f64).ln()) * scale * nf * qn.powi(r as i32 + 1) / (1.0 - qn);
        if bound < ctl.abs_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::TruncationCap {
            what: "E*_f q-expansion",
            cap: ctl.max_terms,
        });
    }
    Ok(slope * z.im + PI / (nf * nf) * sum)
}

// ---------------------------------------------------------------------------
// The one-form η(l, m)
// ---------------------------------------------------------------------------

/// A linear combination `Σ c_x·E*_x` of Eisenstein series.
pub type EisensteinCombination = Vec<(usize, Complex64)>;

/// Combination `Σ_a l(a)·E*_{(0,a)g}` pulling `E*_l` back by `g`.
pub fn pullback_combination(l: &FinDivisor, g: &UnimodularMatrix) -> EisensteinCombination {
    let n = l.modulus() as i64;
    (0..n)
        .filter(|&a| l.weight(a) != czero())
        .map(|a| {
            let (u, v) = g.act_row((0, a), n);
            ((u * n + v) as usize, l.weight(a))
        })
        .collect()
}

fn combo_eval(t: &EStarTable, c: &[(usize, Complex64)]) -> (Complex64, Complex64, Complex64) {
    let mut f = czero();
    let mut d = czero();
    let mut db = czero();
    for &(x, w) in c {
        f += w * t.values[x];
        d += w * t.dz[x];
        db += w * t.dz[x].conj();
    }
    (f, d, db)
}

fn eta_coefficients(t: &EStarTable, l: &[(usize, Complex64)], m: &[(usize, Complex64)]) -> (Complex64, Complex64) {
    let (fl, dl, dbl) = combo_eval(t, l);
    let (fm, dm, dbm) = combo_eval(t, m);
    (fl * dm - fm * dl, -(fl * dbm - fm * dbl))
}

/// `η(l, m) = (E_l ∂E_m − E_m ∂E_l) dz − (E_l ∂̄E_m − E_m ∂̄E_l) dz̄` at `z`.
pub fn eta_form(l: &FinDivisor, m: &FinDivisor, z: Complex64, ctl: &SeriesControl) -> Result<OneFormValue> {
    if l.modulus() != m.modulus() {
        return invalid("divisors must share a modulus");
    }
    let t = e_star_table(l.modulus(), z, ctl)?;
    let g = UnimodularMatrix::identity();
    let (dz, dzbar) = eta_coefficients(&t, &pullback_combination(l, &g), &pullback_combination(m, &g));
    Ok(OneFormValue { z, dz, dzbar })
}

// ---------------------------------------------------------------------------
// Geodesics and quadrature
// ---------------------------------------------------------------------------

/// Hyperbolic geodesic segment between two points of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geodesic {
    /// Vertical segment `x + it`, `t` from `y0` to `y1`.
    Vertical { x: f64, y0: f64, y1: f64 },
    /// Arc `c + r·e^{iθ}`, `θ` from `theta0` to `theta1`.
    Arc {
        center: f64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl Geodesic {
    /// The geodesic from `z0` to `z1`.
    pub fn between(z0: Complex64, z1: Complex64) -> Result<Self> {
        check_z(z0)?;
        check_z(z1)?;
        let dx = z1.re - z0.re;
        if dx.abs() <= 1e-14 * (1.0 + z0.re.abs()) {
            return Ok(Geodesic::Vertical {
                x: z0.re,
                y0: z0.im,
                y1: z1.im,
            });
        }
        let center = (z1.norm_sqr() - z0.norm_sqr()) / (2.0 * dx);
        let radius = (z0 - center).norm();
        Ok(Geodesic::Arc {
            center,
            radius,
            theta0: (z0 - center).arg(),
            theta1: (z1 - center).arg(),
        })
    }

    /// Point and velocity at parameter `s ∈ [0, 1]`.
    pub fn point(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Geodesic::Vertical { x, y0, y1 } => (Complex64::new(x, y0 + s * (y1 - y0)), Complex64::new(0.0, y1 - y0)),
            Geodesic::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let th = theta0 + s * (theta1 - theta0);
                let e = Complex64::from_polar(1.0, th);
                (center + radius * e, I * radius * e * (theta1 - theta0))
            }
        }
    }

    /// Smallest imaginary part along the segment.
    pub fn min_height(&self) -> f64 {
        match *self {
            Geodesic::Vertical { y0, y1, .. } => y0.min(y1),
            Geodesic::Arc {
                radius, theta0, theta1, ..
            } => radius * theta0.sin().min(theta1.sin()),
        }
    }
}

/// `E*` tables at the Gauss–Legendre nodes of a geodesic.
#[derive(Debug, Clone)]
pub struct NodeTable {
    /// Number of nodes.
    pub nodes: usize,
    /// `(weight·γ′(s), table at γ(s))` per node.
    pub entries: Vec<(Complex64, EStarTable)>,
    /// Largest `q_N` truncation index used.
    pub terms: usize,
}

impl NodeTable {
    fn build(n: u64, geo: &Geodesic, nodes: usize, ctl: &SeriesControl) -> Result<Self> {
        let rule = GaussLegendre::cached(nodes);
        let pts = rule.scaled(0.0, 1.0);
        let entries: Vec<Result<(Complex64, EStarTable)>> = par::map_slice(&pts, |&(s, w)| {
            let (z, dz) = geo.point(s);
            Ok((w * dz, e_star_table(n, z, ctl)?))
        });
        let entries = entries.into_iter().collect::<Result<Vec<_>>>()?;
        let terms = entries.iter().map(|(_, t)| t.terms).max().unwrap_or(0);
        Ok(Self { nodes, entries, terms })
    }

    /// `∫ η` for the forms built from the given combinations.
    pub fn integrate(&self, l: &[(usize, Complex64)], m: &[(usize, Complex64)]) -> Complex64 {
        self.entries
            .iter()
            .map(|(wd, t)| {
                let (a, b) = eta_coefficients(t, l, m);
                a * wd + b * wd.conj()
            })
            .sum()
    }
}

/// Result of a converged geodesic integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathIntegral {
    pub value: Complex64,
    /// Node count of the accepted rule.
    pub nodes: usize,
    /// Difference to the rule with half as many nodes.
    pub doubling_delta: f64,
    /// Truncation index of the `q_N`-expansion.
    pub terms: usize,
}

const NODE_LEVELS: [usize; 6] = [16, 32, 64, 128, 256, 512];

/// Gauss–Legendre integrator of `η`-forms along one geodesic at level `N`.
///
/// `E*` tables at the nodes are computed once per node count and shared by
/// every integral, so a family of integrals over the same path costs one
/// table build plus cheap linear combinations. Node counts are doubled until
/// two consecutive rules agree within `tol·max(1, |I|)`.
pub struct GeodesicIntegrator {
    n: u64,
    geodesic: Geodesic,
    ctl: SeriesControl,
    tol: f64,
    tables: Vec<OnceLock<Result<NodeTable>>>,
}

impl GeodesicIntegrator {
    /// Integrator along the geodesic from `z0` to `z1`.
    pub fn new(n: u64, z0: Complex64, z1: Complex64, tol: f64, ctl: SeriesControl) -> Result<Self> {
        if n == 0 {
            return invalid("level must be positive");
        }
        if !(tol > 0.0) {
            return invalid("quadrature tolerance must be positive");
        }
        Ok(Self {
            n,
            geodesic: Geodesic::between(z0, z1)?,
            ctl,
            tol,
            tables: NODE_LEVELS.iter().map(|_| OnceLock::new()).collect(),
        })
    }

    /// Integrator along the arc from `ρ = e^{iπ/3}` to `ρ²`.
    pub fn rho_arc(n: u64, tol: f64, ctl: SeriesControl) -> Result<Self> {
        let rho = Complex64::from_polar(1.0, PI / 3.0);
        Self::new(n, rho, rho * rho, tol, ctl)
    }

    /// Level `N`.
    pub fn level(&self) -> u64 {
        self.n
    }

    /// The path.
    pub fn geodesic(&self) -> &Geodesic {
        &self.geodesic
    }

    fn table(&self, k: usize) -> Result<&NodeTable> {
        self.tables[k]
            .get_or_init(|| NodeTable::build(self.n, &self.geodesic, NODE_LEVELS[k], &self.ctl))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `∫ η` for the forms `Σ l_x E*_x`, `Σ m_x E*_x`.
    pub fn integrate_combination(&self, l: &[(usize, Complex64)], m: &[(usize, Complex64)]) -> Result<PathIntegral> {
        let mut prev = self.table(0)?.integrate(l, m);
        for k in 1..NODE_LEVELS.len() {
            let t = self.table(k)?;
            let cur = t.integrate(l, m);
            let delta = (cur - prev).norm();
            if delta <= self.tol * cur.norm().max(1.0) {
                return Ok(PathIntegral {
                    value: cur,
                    nodes: t.nodes,
                    doubling_delta: delta,
                    terms: t.terms,
                });
            }
            prev = cur;
        }
        Err(Error::NoConvergence {
            what: "geodesic quadrature",
            detail: format!("no agreement within {} up to {} nodes", self.tol, NODE_LEVELS[NODE_LEVELS.len() - 1]),
        })
    }

    /// `∫_{g z0}^{g z1} η(l, m)`, computed as the integral from `z0` to `z1`
    /// of the form attached to the pulled-back series `E*_{(0,a)g}`.
    pub fn integrate_pullback(&self, l: &FinDivisor, m: &FinDivisor, g: &UnimodularMatrix) -> Result<PathIntegral> {
        if l.modulus() != self.n || m.modulus() != self.n {
            return invalid("divisor modulus does not match the integrator level");
        }
        self.integrate_combination(&pullback_combination(l, g), &pullback_combination(m, g))
    }
}

/// `∫_{g z0}^{g z1} η(l, m)` along the geodesic, pulled back to `[z0, z1]`.
pub fn integrate_eta_pullback(
    l: &FinDivisor,
    m: &FinDivisor,
    g: &UnimodularMatrix,
    z0: Complex64,
    z1: Complex64,
    tol: f64,
    ctl: &SeriesControl,
) -> Result<PathIntegral> {
    if l.modulus() != m.modulus() {
        return invalid("divisors must share a modulus");
    }
    if z0 == z1 {
        check_z(z0)?;
        return Ok(PathIntegral {
            value: czero(),
            nodes: 0,
            doubling_delta: 0.0,
            terms: 0,
        });
    }
    GeodesicIntegrator::new(l.modulus(), z0, z1, tol, *ctl)?.integrate_pullback(l, m, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bottom_row_lift() {
        for n in [5i64, 11, 13] {
            for u in 0..n {
                for v in 0..n {
                    if u.gcd(&v).gcd(&n) != 1 {
                        continue;
                    }
                    let g = UnimodularMatrix::from_bottom_row(u, v, n).unwrap();
                    assert_eq!(g.c.rem_euclid(n), u);
                    assert_eq!(g.d.rem_euclid(n), v);
                }
            }
        }
    }

    #[test]
    fn zeta_single_matches_table() {
        let ctl = SeriesControl::default();
        let z = Complex64::new(0.2, 0.9);
        let t = zeta_star_table(7, z, &ctl).unwrap();
        for a in 0..7i64 {
            for b in 0..7i64 {
                let (v, d) = zeta_star_with_derivative(a, b, 7, z, &ctl).unwrap();
                assert!((v - t.values[(a * 7 + b) as usize]).abs() < 1e-12);
                assert!((d - t.dz[(a * 7 + b) as usize]).norm() < 1e-12);
            }
        }
    }
}
