//! Completed L-functions of weight-2 forms.
//!
//! For a form `g` of level `M` with coefficients `a_n`,
//! `Λ(g, s) = M^{s/2}(2π)^{−s}Γ(s)L(g, s) = ∫₀^∞ g(iu/√M) u^s du/u`, and the
//! Fricke relation `g(−1/(Mz)) = w·M·z²·ḡ(z)` gives `Λ(g, s) = −w·Λ(ḡ, 2 − s)`.
//! Splitting the integral at `u = c` yields the rapidly convergent series
//!
//! `Λ(g, s) = Σ a_n (2πn/√M)^{−s} Γ(s, 2πnc/√M) − w Σ ā_n (2πn/√M)^{s−2} Γ(2 − s, 2πn/(c√M))`.
//!
//! Root numbers are always computed numerically from `g` itself.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::{enumerate_characters, gauss_sum, is_prime, DirichletCharacter};
use crate::elliptic::CurveModel;
use crate::error::{invalid, Error, Result};
use crate::specialfns::{incomplete_gamma_upper_complex, SeriesControl};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A weight-2 form given by its coefficient stream, with lazily computed root number.
#[derive(Debug, Clone)]
pub struct ModularFormData {
    level: u64,
    coeffs: Arc<Vec<Complex64>>,
    conj_coeffs: Arc<Vec<Complex64>>,
    tag: String,
    root_number: OnceLock<Complex64>,
}

/// Result of a smoothed `Λ` evaluation with its truncation data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaEvaluation {
    pub value: Complex64,
    /// Number of coefficients used by the two series.
    pub terms: (usize, usize),
    /// Upper bound on the neglected tail.
    pub tail_bound: f64,
}

impl ModularFormData {
    /// Form from explicit coefficient streams (index 0 ignored).
    pub fn new(level: u64, coeffs: Vec<Complex64>, conj_coeffs: Vec<Complex64>, tag: impl Into<String>) -> Result<Self> {
        if level == 0 {
            return invalid("level must be positive");
        }
        if coeffs.len() < 2 || coeffs.len() != conj_coeffs.len() {
            return invalid("coefficient streams must be non-empty and of equal length");
        }
        Ok(Self {
            level,
            coeffs: Arc::new(coeffs),
            conj_coeffs: Arc::new(conj_coeffs),
            tag: tag.into(),
            root_number: OnceLock::new(),
        })
    }

    /// The newform attached to an elliptic curve, with `nmax` coefficients.
    pub fn from_curve(curve: &CurveModel, nmax: usize) -> Result<Self> {
        let a: Vec<Complex64> = curve
            .an_coefficients(nmax)?
            .into_iter()
            .map(|x| Complex64::new(x as f64, 0.0))
            .collect();
        Self::new(curve.conductor, a.clone(), a, format!("curve{}", curve.conductor))
    }

    /// Level `M`.
    pub fn level(&self) -> u64 {
        self.level
    }

    /// Character tag describing the form.
    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Number of stored coefficients (`a_1..a_len`).
    pub fn len(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// True when no coefficient is stored.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `a_n` (`n ≥ 1`).
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs[n]
    }

    /// Coefficient stream `a_0..a_len` (`a_0 = 0`).
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficients of `ḡ`.
    pub fn conj_coefficients(&self) -> &[Complex64] {
        &self.conj_coeffs
    }

    /// The form `ḡ` with conjugate coefficients.
    pub fn conjugate(&self) -> Self {
        let out = Self {
            level: self.level,
            coeffs: self.conj_coeffs.clone(),
            conj_coeffs: self.coeffs.clone(),
            tag: format!("conj({})", self.tag),
            root_number: OnceLock::new(),
        };
        if let Some(w) = self.root_number.get() {
            // Λ(g, s) = −w Λ(ḡ, 2−s) and the same for ḡ force w(ḡ) = 1/w(g).
            let _ = out.root_number.set(w.inv());
        }
        out
    }

    /// Twist `f ⊗ χ` of a trivial-character form of prime level `p` by a
    /// primitive character modulo `p`; the result has level `p²` and `a_p = 0`.
    pub fn twist(&self, chi: &DirichletCharacter) -> Result<Self> {
        if chi.modulus() != self.level {
            return invalid(format!(
                "twist needs a character modulo the level {}, got modulus {}",
                self.level,
                chi.modulus()
            ));
        }
        if chi.is_trivial() {
            return Ok(self.clone());
        }
        if !is_prime(self.level) || !chi.is_primitive() {
            return invalid("twisting is implemented for primitive characters of prime modulus equal to the level");
        }
        let n = self.coeffs.len();
        let coeffs = (0..n).map(|k| self.coeffs[k] * chi.value(k as i64)).collect();
        let conj = (0..n).map(|k| self.conj_coeffs[k] * chi.value(k as i64).conj()).collect();
        Self::new(self.level * self.level, coeffs, conj, format!("{}⊗{}", self.tag, chi.label()))
    }

    /// Smallest usable `Im z` for [`eval_form`] with the stored coefficients.
    pub fn min_height(&self, ctl: &SeriesControl) -> f64 {
        let digits = -(ctl.abs_tol.max(1e-300)).ln() + (self.len() as f64).ln();
        digits / (2.0 * PI * self.len() as f64)
    }

    /// Numeric root number, computed once.
    pub fn root_number(&self, ctl: &SeriesControl) -> Result<Complex64> {
        if let Some(w) = self.root_number.get() {
            return Ok(*w);
        }
        let w = compute_root_number(self, ctl)?;
        Ok(*self.root_number.get_or_init(|| w))
    }
}

fn series_at(coeffs: &[Complex64], z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    let x = z.re - z.re.round();
    let r = (-2.0 * PI * z.im).exp();
    let step = Complex64::from_polar(r, 2.0 * PI * x);
    let mut qn = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let nmax = (coeffs.len() - 1).min(ctl.max_terms);
    for n in 1..=nmax {
        qn *= step;
        sum += coeffs[n] * qn;
        // |a_k| ≤ k for the forms in scope; Σ_{k>n} k r^k ≤ (n+1) r^{n+1}/(1−r)²
        let nf = n as f64 + 1.0;
        let tail = nf * r.powf(nf) / ((1.0 - r) * (1.0 - r));
        if tail < ctl.abs_tol * sum.norm().max(f64::MIN_POSITIVE) || tail < 1e-300 {
            return Ok(sum);
        }
    }
    Err(Error::TruncationCap {
        what: "q-expansion",
        cap: nmax,
    })
}

/// `g(z) = Σ a_n e^{2πinz}`.
pub fn eval_form(form: &ModularFormData, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return invalid("q-expansion needs Im z > 0");
    }
    if z.im < form.min_height(ctl) {
        return invalid(format!(
            "Im z = {} is below the usable height {} for {} coefficients",
            z.im,
            form.min_height(ctl),
            form.len()
        ));
    }
    series_at(&form.coeffs, z, ctl)
}

/// `ḡ(z)`.
pub fn eval_conjugate_form(form: &ModularFormData, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    if z.im < form.min_height(ctl) {
        return invalid("point below the usable height");
    }
    series_at(&form.conj_coeffs, z, ctl)
}

fn root_number_at(form: &ModularFormData, y: f64, ctl: &SeriesControl) -> Result<Option<Complex64>> {
    let m = form.level as f64;
    let gbar = eval_conjugate_form(form, I * y, ctl)?;
    let g = eval_form(form, I / (m * y), ctl)?;
    let scale = (-2.0 * PI * y).exp();
    if gbar.norm() < 1e-6 * scale {
        return Ok(None);
    }
    Ok(Some(-g / (m * y * y * gbar)))
}

fn compute_root_number(form: &ModularFormData, ctl: &SeriesControl) -> Result<Complex64> {
    let sqrt_m = (form.level as f64).sqrt();
    let mut found = Vec::new();
    let mut y = 0.9 / sqrt_m;
    for _ in 0..12 {
        if let Some(w) = root_number_at(form, y, ctl)? {
            found.push(w);
            if found.len() == 2 {
                break;
            }
            y = 1.1 / sqrt_m;
        } else {
            y *= 1.037;
        }
    }
    if found.len() < 2 {
        return Err(Error::NoConvergence {
            what: "root number",
            detail: format!("ḡ(iy) vanishes at every sampled height for {}", form.tag),
        });
    }
    let (w1, w2) = (found[0], found[1]);
    if (w1 - w2).norm() > 1e-8 || (w1.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::Inconsistent {
            what: "root number",
            detail: format!("samples {w1} and {w2} for {}", form.tag),
        });
    }
    Ok(w1)
}

/// Numeric root number `w` with `g(−1/(Mz)) = w·M·z²·ḡ(z)`.
pub fn root_number(form: &ModularFormData, ctl: &SeriesControl) -> Result<Complex64> {
    form.root_number(ctl)
}

fn incomplete_series(
    coeffs: &[Complex64],
    s: Complex64,
    scale: f64,
    start: f64,
    ctl: &SeriesControl,
) -> Result<(Complex64, usize, f64)> {
    // Σ a_n (scale·n)^{−s} Γ(s, start·n)
    let mut sum = Complex64::new(0.0, 0.0);
    let sigma = s.re;
    let nmax = coeffs.len() - 1;
    for n in 1..=nmax.min(ctl.max_terms) {
        let nf = n as f64;
        let x = start * nf;
        let a = coeffs[n];
        if a.norm() != 0.0 {
            let g = incomplete_gamma_upper_complex(s, x, ctl)?;
            sum += a * (-s * (scale * nf).ln()).exp() * g;
        }
        // tail bound: |Γ(s, x)| ≤ 2 x^{σ−1} e^{−x} once x ≥ 2|σ−1| + 2, |a_k| ≤ k
        let xn = start * (nf + 1.0);
        if xn >= 2.0 * (sigma - 1.0).abs() + 2.0 {
            // successive bounds shrink at least by e^{−start}·(1 + 1/n)^{|σ|+1}
            let ratio = ((-start).exp() * (1.0 + 1.0 / nf).powf(sigma.abs() + 1.0)).min(0.999);
            let term = (nf + 1.0) * (scale * (nf + 1.0)).powf(-sigma) * 2.0 * xn.powf(sigma - 1.0) * (-xn).exp();
            let bound = term / (1.0 - ratio);
            if bound < ctl.abs_tol * sum.norm().max(1.0) {
                return Ok((sum, n, bound));
            }
        }
    }
    Err(Error::TruncationCap {
        what: "smoothed L-series",
        cap: nmax.min(ctl.max_terms),
    })
}

/// `Λ(g, s)` split at `u = c`, with truncation data.
pub fn lambda_value_split(form: &ModularFormData, s: Complex64, split: f64, ctl: &SeriesControl) -> Result<LambdaEvaluation> {
    if !(split > 0.0) || !split.is_finite() {
        return invalid("split point must be positive");
    }
    let w = form.root_number(ctl)?;
    let sqrt_m = (form.level as f64).sqrt();
    let scale = 2.0 * PI / sqrt_m;
    let (first, n1, b1) = incomplete_series(&form.coeffs, s, scale, scale * split, ctl)?;
    let (second, n2, b2) = incomplete_series(&form.conj_coeffs, 2.0 - s, scale, scale / split, ctl)?;
    Ok(LambdaEvaluation {
        value: first - w * second,
        terms: (n1, n2),
        tail_bound: b1 + b2,
    })
}

/// `Λ(g, s) = M^{s/2}(2π)^{−s}Γ(s)L(g, s)`.
pub fn lambda_value(form: &ModularFormData, s: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    Ok(lambda_value_split(form, s, 1.0, ctl)?.value)
}

/// `L(g, s)` from `Λ` for `s` away from the poles of `Γ`.
pub fn l_value(form: &ModularFormData, s: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    let lam = lambda_value(form, s, ctl)?;
    let m = form.level as f64;
    let factor = (s / 2.0 * m.ln()).exp() * (-s * (2.0 * PI).ln()).exp() * crate::specialfns::gamma_complex(s);
    Ok(lam / factor)
}

/// `L(E, 2)` for the form of an elliptic curve.
pub fn l_at_2(form: &ModularFormData, ctl: &SeriesControl) -> Result<f64> {
    let lam = lambda_value(form, Complex64::new(2.0, 0.0), ctl)?;
    Ok(lam.re * (2.0 * PI).powi(2) / form.level as f64)
}

/// `L(f, χ, 1) = (2π/p)·Λ(f ⊗ χ, 1)` for a primitive `χ` modulo the prime level `p`,
/// and `L(f, 1) = (2π/√p)·Λ(f, 1)` for trivial `χ`.
pub fn l_twist_at_1(form: &ModularFormData, chi: &DirichletCharacter, ctl: &SeriesControl) -> Result<Complex64> {
    let twisted = form.twist(chi)?;
    let lam = lambda_value(&twisted, Complex64::new(1.0, 0.0), ctl)?;
    Ok(lam * 2.0 * PI / (twisted.level as f64).sqrt())
}

/// `Λ(f ⊗ χ, 1)` for every character modulo the prime level, in the order of
/// [`enumerate_characters`]; the trivial entry is `Λ(f, 1)`.
pub fn twisted_lambda_table(form: &ModularFormData, ctl: &SeriesControl) -> Result<Vec<(DirichletCharacter, Complex64)>> {
    let chars = enumerate_characters(form.level)?;
    let vals = crate::par::map_slice(&chars, |chi| {
        let t = form.twist(chi)?;
        lambda_value(&t, Complex64::new(1.0, 0.0), ctl)
    });
    chars.into_iter().zip(vals).map(|(c, v)| Ok((c, v?))).collect()
}

/// Residue at `s = 2` of the Rankin–Selberg convolution `L(f ⊗ f̄, s)` from
/// twisted central values: `(2πi/((N+1)(N−1)²)) Σ_{χχ′ odd} Λ(f⊗χ′,1)Λ(f⊗χ,1)/τ(χχ′)`
/// over primitive `χ, χ′` modulo the prime level `N`.
pub fn rankin_residue(form: &ModularFormData, ctl: &SeriesControl) -> Result<Complex64> {
    let n = form.level;
    if !is_prime(n) {
        return invalid("the residue formula is implemented for prime level");
    }
    let table = twisted_lambda_table(form, ctl)?;
    residue_from_table(n, &table)
}

/// The residue sum given precomputed `Λ(f ⊗ χ, 1)` values.
pub fn residue_from_table(n: u64, table: &[(DirichletCharacter, Complex64)]) -> Result<Complex64> {
    let prim: Vec<&(DirichletCharacter, Complex64)> = table.iter().filter(|(c, _)| c.is_primitive() && !c.is_trivial()).collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for (chi, lchi) in &prim {
        for (chi2, lchi2) in &prim {
            let prod = chi.mul(chi2)?;
            if prod.is_even() {
                continue;
            }
            sum += lchi2 * lchi / gauss_sum(&prod);
        }
    }
    let nf = n as f64;
    Ok(2.0 * PI * I / ((nf + 1.0) * (nf - 1.0) * (nf - 1.0)) * sum)
}

// ---------------------------------------------------------------------------
// Exact Dirichlet-series convolution
// ---------------------------------------------------------------------------

/// Element of the cyclotomic ring `Z[ζ_m]`, stored as a polynomial in `ζ_m` of
/// degree `< m` and reduced modulo `Φ_m` on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicInt {
    m: usize,
    c: Vec<i128>,
}

impl CyclotomicInt {
    /// Zero of `Z[ζ_m]`.
    pub fn zero(m: usize) -> Self {
        Self { m, c: vec![0; m] }
    }

    /// `k·ζ_m^e`.
    pub fn monomial(m: usize, e: usize, k: i128) -> Self {
        let mut z = Self::zero(m);
        z.c[e % m] = k;
        z
    }

    /// True if every stored coefficient vanishes.
    pub fn is_zero_raw(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    /// `self += k·other`.
    pub fn add_scaled(&mut self, other: &Self, k: i128) {
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += k * b;
        }
    }

    /// Product in `Z[ζ_m]`.
    pub fn mul(&self, other: &Self) -> Self {
        let m = self.m;
        let mut out = Self::zero(m);
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                if b != 0 {
                    out.c[(i + j) % m] += a * b;
                }
            }
        }
        out
    }

    /// Canonical representative modulo `Φ_m`.
    pub fn reduce(&self) -> Vec<i128> {
        let phi = cyclotomic_polynomial(self.m);
        let deg = phi.len() - 1;
        let mut r = self.c.clone();
        for top in (deg..r.len()).rev() {
            let lead = r[top];
            if lead != 0 {
                for (k, &p) in phi.iter().enumerate() {
                    r[top - deg + k] -= lead * p;
                }
            }
        }
        r.truncate(deg);
        r
    }

    /// Complex value with `ζ_m = e^{2πi/m}`.
    pub fn to_complex(&self) -> Complex64 {
        let m = self.m as f64;
        self.c
            .iter()
            .enumerate()
            .map(|(e, &k)| k as f64 * Complex64::from_polar(1.0, 2.0 * PI * e as f64 / m))
            .sum()
    }
}

/// Coefficients (low degree first) of the cyclotomic polynomial `Φ_m`.
pub fn cyclotomic_polynomial(m: usize) -> Vec<i128> {
    // Φ_m = (x^m − 1) / Π_{d | m, d < m} Φ_d
    let mut num = vec![0i128; m + 1];
    num[0] = -1;
    num[m] = 1;
    for d in 1..m {
        if m % d == 0 {
            let den = cyclotomic_polynomial(d);
            num = poly_div_exact(&num, &den);
        }
    }
    num
}

fn poly_div_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let qd = r.len() - 1 - dd;
    let mut q = vec![0i128; qd + 1];
    for k in (0..=qd).rev() {
        let coef = r[k + dd] / den[dd];
        q[k] = coef;
        for (j, &d) in den.iter().enumerate() {
            r[k + j] -= coef * d;
        }
    }
    q
}

fn char_cyclotomic(chi: &DirichletCharacter, n: usize, m: usize) -> Option<usize> {
    let base = chi.exponent_base() as usize;
    chi.exponent(n as i64).map(|e| e as usize * (m / base))
}

fn moebius_table(nmax: usize) -> Vec<i8> {
    let mut mu = vec![1i8; nmax + 1];
    let mut is_comp = vec![false; nmax + 1];
    for p in 2..=nmax {
        if !is_comp[p] {
            let mut k = p;
            while k <= nmax {
                if k > p {
                    is_comp[k] = true;
                }
                mu[k] = -mu[k];
                k += p;
            }
            let pp = p * p;
            let mut k = pp;
            while k <= nmax {
                mu[k] = 0;
                k += pp;
            }
        }
    }
    mu
}

/// Outcome of the exact convolution identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankinReport {
    pub nmax: usize,
    /// Largest `|LHS_n − RHS_n|` evaluated in `C`.
    pub max_abs_error: f64,
    /// Indices whose difference is non-zero in `Z[ζ_m]`.
    pub exact_mismatches: Vec<usize>,
}

/// Compares the Dirichlet coefficients of `Σ a_n σ_{χ₁,χ₂}(n) n^{−s}` with those
/// of `L(f, χ₂, s)·L(f, χ₁, s−1)/L(ψχ₁χ₂, 2s−2)` for `n ≤ nmax`, `ψ` trivial
/// modulo the level and `σ_{χ₁,χ₂}(n) = Σ_{d|n} d·χ₁(d)·χ₂(n/d)`.
///
/// The form must have integral coefficients; all arithmetic is exact in `Z[ζ_m]`.
pub fn rankin_convolution_check(
    form: &ModularFormData,
    chi1: &DirichletCharacter,
    chi2: &DirichletCharacter,
    nmax: usize,
) -> Result<RankinReport> {
    if nmax == 0 {
        return invalid("nmax must be at least 1");
    }
    if form.len() < nmax {
        return invalid(format!("form has {} coefficients, {nmax} requested", form.len()));
    }
    let mut a = vec![0i128; nmax + 1];
    for (n, slot) in a.iter_mut().enumerate().skip(1) {
        let c = form.coeff(n);
        let r = c.re.round();
        if (c.re - r).abs() > 1e-9 || c.im.abs() > 1e-9 {
            return invalid("the convolution check needs integral coefficients");
        }
        *slot = r as i128;
    }
    let b1 = chi1.exponent_base() as usize;
    let b2 = chi2.exponent_base() as usize;
    let m = num_integer::lcm(b1, b2);
    let level = form.level() as usize;
    let chi = |c: &DirichletCharacter, n: usize| char_cyclotomic(c, n, m);

    let mut lhs = vec![CyclotomicInt::zero(m); nmax + 1];
    let mut first = vec![CyclotomicInt::zero(m); nmax + 1];
    let mut second = vec![CyclotomicInt::zero(m); nmax + 1];
    for n in 1..=nmax {
        if let Some(e) = chi(chi2, n) {
            first[n] = CyclotomicInt::monomial(m, e, a[n]);
        }
        if let Some(e) = chi(chi1, n) {
            second[n] = CyclotomicInt::monomial(m, e, a[n] * n as i128);
        }
    }
    for d in 1..=nmax {
        let Some(e1) = chi(chi1, d) else { continue };
        let mut k = 1;
        while d * k <= nmax {
            if let Some(e2) = chi(chi2, k) {
                let n = d * k;
                lhs[n].add_scaled(&CyclotomicInt::monomial(m, e1 + e2, d as i128), a[n]);
            }
            k += 1;
        }
    }
    let mut prod = vec![CyclotomicInt::zero(m); nmax + 1];
    for d in 1..=nmax {
        if first[d].is_zero_raw() {
            continue;
        }
        let mut k = 1;
        while d * k <= nmax {
            if !second[k].is_zero_raw() {
                let t = first[d].mul(&second[k]);
                prod[d * k].add_scaled(&t, 1);
            }
            k += 1;
        }
    }
    let mu = moebius_table(nmax);
    let mut rhs = vec![CyclotomicInt::zero(m); nmax + 1];
    let mut j = 1;
    while j * j <= nmax {
        let jj = j * j;
        let inv = if mu[j] == 0 || num_integer::gcd(j, level) != 1 {
            None
        } else {
            match (chi(chi1, j), chi(chi2, j)) {
                (Some(e1), Some(e2)) => Some(CyclotomicInt::monomial(m, e1 + e2, mu[j] as i128 * jj as i128)),
                _ => None,
            }
        };
        if let Some(inv) = inv {
            let mut k = 1;
            while jj * k <= nmax {
                if !prod[k].is_zero_raw() {
                    let t = inv.mul(&prod[k]);
                    rhs[jj * k].add_scaled(&t, 1);
                }
                k += 1;
            }
        }
        j += 1;
    }
    let mut max_abs_error: f64 = 0.0;
    let mut exact_mismatches = Vec::new();
    for n in 1..=nmax {
        let mut diff = lhs[n].clone();
        diff.add_scaled(&rhs[n], -1);
        if diff.reduce().iter().any(|&x| x != 0) {
            exact_mismatches.push(n);
        }
        max_abs_error = max_abs_error.max(diff.to_complex().norm());
    }
    Ok(RankinReport {
        nmax,
        max_abs_error,
        exact_mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(5), vec![1, 1, 1, 1, 1]);
        assert_eq!(cyclotomic_polynomial(10), vec![1, -1, 1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn reduction_kills_phi() {
        let mut z = CyclotomicInt::zero(5);
        for e in 0..5 {
            z.add_scaled(&CyclotomicInt::monomial(5, e, 1), 1);
        }
        assert!(z.reduce().iter().all(|&x| x == 0));
        assert!(z.to_complex().norm() < 1e-14);
    }

    #[test]
    fn moebius_small() {
        let mu = moebius_table(12);
        assert_eq!(&mu[1..13], &[1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]);
    }
}
