//! Logarithmic Mahler measure of two-variable integer polynomials.
//!
//! `m(P) = ∫₀¹ m(P(e^{2πiu}, ·)) du`, where the inner one-variable measure comes
//! from Jensen's formula `m(Q) = log|a_d| + Σ log⁺|ρ|` over the roots of `Q`.
//! The outer integrand is continuous but has kinks where a root crosses the
//! unit circle; these points are located by a scan of the number of roots
//! outside the circle followed by bisection, and the outer integral is split
//! there into smooth panels integrated by adaptive Gauss–Legendre.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::specialfns::{adaptive_gauss_legendre, SeriesControl};

/// Polynomial in `X, Y` with integer coefficients, stored as `(i, j) ↦ c` for `c·X^i Y^j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BivariatePolynomial {
    terms: BTreeMap<(u32, u32), i64>,
}

impl BivariatePolynomial {
    /// From `(i, j, c)` triples; repeated monomials add up and zero terms are dropped.
    pub fn from_terms(terms: &[(u32, u32, i64)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(i, j, c) in terms {
            *map.entry((i, j)).or_insert(0i64) += c;
        }
        map.retain(|_, c| *c != 0);
        if map.is_empty() {
            return invalid("the Mahler measure of the zero polynomial is undefined");
        }
        Ok(Self { terms: map })
    }

    /// From a dense matrix `m[i][j]` = coefficient of `X^i Y^j`.
    pub fn from_matrix(m: &[Vec<i64>]) -> Result<Self> {
        let mut terms = Vec::new();
        for (i, row) in m.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                terms.push((i as u32, j as u32, c));
            }
        }
        Self::from_terms(&terms)
    }

    /// Parses the sparse format `X^i Y^j: c`, one term per `;` or line.
    ///
    /// A factor may be omitted (exponent 0) and `X` stands for `X^1`; the
    /// constant term is written `1: c`. Example: `Y^2: 1; X^2 Y: 1; X Y: 2; Y: -1; X^3: 1`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for raw in text.split([';', '\n']) {
            let t = raw.trim();
            if t.is_empty() {
                continue;
            }
            let (mono, coeff) = t
                .rsplit_once(':')
                .ok_or_else(|| Error::InvalidInput(format!("term {t:?} lacks ': coefficient'")))?;
            let c: i64 = coeff
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad coefficient in {t:?}")))?;
            let (mut i, mut j) = (0u32, 0u32);
            let (mut seen_x, mut seen_y) = (false, false);
            for factor in mono.split_whitespace() {
                if factor == "1" {
                    continue;
                }
                let (var, exp) = match factor.split_once('^') {
                    Some((v, e)) => (
                        v,
                        e.parse::<u32>()
                            .map_err(|_| Error::InvalidInput(format!("bad exponent in {factor:?}")))?,
                    ),
                    None => (factor, 1),
                };
                match var {
                    "X" | "x" if !seen_x => {
                        i = exp;
                        seen_x = true;
                    }
                    "Y" | "y" if !seen_y => {
                        j = exp;
                        seen_y = true;
                    }
                    _ => return invalid(format!("unexpected factor {factor:?} in {t:?}")),
                }
            }
            terms.push((i, j, c));
        }
        if terms.is_empty() {
            return invalid("empty polynomial");
        }
        Self::from_terms(&terms)
    }

    /// `(deg_X, deg_Y)`.
    pub fn degrees(&self) -> (u32, u32) {
        let dx = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let dy = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        (dx, dy)
    }

    /// Nonzero terms as `((i, j), c)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &i64)> {
        self.terms.iter()
    }

    /// Value at `(x, y)`.
    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.terms.iter().map(|(&(i, j), &c)| c as f64 * x.powu(i) * y.powu(j)).sum()
    }

    /// Coefficients in `Y` (low degree first) at a fixed `x`.
    pub fn y_coefficients(&self, x: Complex64) -> Vec<Complex64> {
        let (_, dy) = self.degrees();
        let mut out = vec![Complex64::new(0.0, 0.0); dy as usize + 1];
        for (&(i, j), &c) in &self.terms {
            out[j as usize] += c as f64 * x.powu(i);
        }
        out
    }

    /// Product of two polynomials.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut terms = Vec::new();
        for (&(i, j), &c) in &self.terms {
            for (&(k, l), &d) in &other.terms {
                let cd = c
                    .checked_mul(d)
                    .ok_or_else(|| Error::InvalidInput("coefficient overflow in product".into()))?;
                terms.push((i + k, j + l, cd));
            }
        }
        Self::from_terms(&terms)
    }

    /// `X^{deg_X}·P(1/X, Y)`, which has the same Mahler measure.
    pub fn reciprocal_in_x(&self) -> Self {
        let (dx, _) = self.degrees();
        Self {
            terms: self.terms.iter().map(|(&(i, j), &c)| ((dx - i, j), c)).collect(),
        }
    }

    /// Coefficient of `Y^j` as a polynomial in `X` (low degree first).
    fn x_polynomial_of_y_degree(&self, j: u32) -> Vec<i128> {
        let (dx, _) = self.degrees();
        let mut out = vec![0i128; dx as usize + 1];
        for (&(i, jj), &c) in &self.terms {
            if jj == j {
                out[i as usize] += c as i128;
            }
        }
        trim(&mut out);
        out
    }

    /// `P = c(X)·P′` with `c` the primitive gcd in `Z[X]` of the `Y`-coefficients
    /// (positive leading coefficient); `c = [1]` when there is no such factor.
    pub fn split_x_content(&self) -> Result<(Vec<i128>, Self)> {
        let (_, dy) = self.degrees();
        let mut g: Vec<i128> = Vec::new();
        for j in 0..=dy {
            let c = self.x_polynomial_of_y_degree(j);
            if !c.is_empty() {
                g = if g.is_empty() { primitive(&c) } else { poly_gcd(&g, &c)? };
            }
        }
        if g.len() <= 1 {
            return Ok((vec![1], self.clone()));
        }
        let mut terms = Vec::new();
        for j in 0..=dy {
            let c = self.x_polynomial_of_y_degree(j);
            if c.is_empty() {
                continue;
            }
            let q = poly_div_exact(&c, &g).ok_or_else(|| Error::Inconsistent {
                what: "polynomial content",
                detail: "gcd does not divide a coefficient".into(),
            })?;
            for (i, &a) in q.iter().enumerate() {
                let a = i64::try_from(a).map_err(|_| Error::InvalidInput("coefficient overflow in content split".into()))?;
                terms.push((i as u32, j, a));
            }
        }
        Ok((g, Self::from_terms(&terms)?))
    }

    /// `P(Y, X)`.
    pub fn swap_variables(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&(i, j), &c)| ((j, i), c)).collect(),
        }
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(&(i, j), &c)| {
                let mut mono = Vec::new();
                if i > 0 {
                    mono.push(if i == 1 { "X".to_string() } else { format!("X^{i}") });
                }
                if j > 0 {
                    mono.push(if j == 1 { "Y".to_string() } else { format!("Y^{j}") });
                }
                if mono.is_empty() {
                    mono.push("1".into());
                }
                format!("{}: {c}", mono.join(" "))
            })
            .collect();
        f.write_str(&parts.join("; "))
    }
}

// ---------------------------------------------------------------------------
// Integer polynomials in X (low degree first)
// ---------------------------------------------------------------------------

fn trim(p: &mut Vec<i128>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn gcd_i(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Divides out the integer content and makes the leading coefficient positive.
fn primitive(p: &[i128]) -> Vec<i128> {
    let g = p.iter().fold(0, |g, &c| gcd_i(g, c));
    if g == 0 {
        return Vec::new();
    }
    let s = if p.last().copied().unwrap_or(1) < 0 { -g } else { g };
    p.iter().map(|&c| c / s).collect()
}

/// Pseudo-remainder of `a` by `b` (nonzero).
fn pseudo_rem(a: &[i128], b: &[i128]) -> Result<Vec<i128>> {
    let overflow = || Error::InvalidInput("coefficient overflow in polynomial gcd".into());
    let mut r = a.to_vec();
    let lb = *b.last().expect("nonzero divisor");
    while r.len() >= b.len() && !r.is_empty() {
        let lr = *r.last().expect("nonempty");
        let shift = r.len() - b.len();
        for c in r.iter_mut() {
            *c = c.checked_mul(lb).ok_or_else(overflow)?;
        }
        for (k, &bc) in b.iter().enumerate() {
            r[k + shift] = r[k + shift].checked_sub(lr.checked_mul(bc).ok_or_else(overflow)?).ok_or_else(overflow)?;
        }
        trim(&mut r);
        // any nonzero multiple of the remainder has the same gcd with b
        r = primitive(&r);
    }
    Ok(r)
}

/// Primitive gcd in `Z[X]` with positive leading coefficient.
fn poly_gcd(a: &[i128], b: &[i128]) -> Result<Vec<i128>> {
    let (mut a, mut b) = (primitive(a), primitive(b));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let r = pseudo_rem(&a, &b)?;
        a = b;
        b = primitive(&r);
    }
    Ok(primitive(&a))
}

/// `a / b` when the division is exact in `Z[X]`.
fn poly_div_exact(a: &[i128], b: &[i128]) -> Option<Vec<i128>> {
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() < b.len() {
        return if r.is_empty() { Some(Vec::new()) } else { None };
    }
    let lb = *b.last()?;
    let mut q = vec![0i128; r.len() - b.len() + 1];
    for k in (0..q.len()).rev() {
        let lr = r[k + b.len() - 1];
        if lr % lb != 0 {
            return None;
        }
        let f = lr / lb;
        q[k] = f;
        for (j, &bc) in b.iter().enumerate() {
            r[k + j] -= f * bc;
        }
    }
    if r.iter().all(|&c| c == 0) {
        Some(q)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// One variable
// ---------------------------------------------------------------------------

/// Balances a companion matrix by powers of two (Parlett–Reinsch).
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].l1_norm();
                    r += m[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of `Σ c_k z^k` (low degree first, leading coefficient nonzero) from the
/// eigenvalues of the balanced companion matrix, each polished by one Newton step.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = coeffs.len().saturating_sub(1);
    if coeffs.is_empty() || coeffs[d] == Complex64::new(0.0, 0.0) {
        return invalid("leading coefficient must be nonzero");
    }
    match d {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-coeffs[0] / coeffs[1]]),
        _ => {}
    }
    let lead = coeffs[d];
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for k in 0..d {
        m[(0, k)] = -coeffs[d - 1 - k] / lead;
    }
    for k in 1..d {
        m[(k, k - 1)] = Complex64::new(1.0, 0.0);
    }
    balance(&mut m);
    let schur = Schur::try_new(m, f64::EPSILON, 10_000).ok_or_else(|| Error::NoConvergence {
        what: "companion eigenvalues",
        detail: format!("Schur iteration failed for degree {d}"),
    })?;
    let eig = schur.eigenvalues().ok_or_else(|| Error::NoConvergence {
        what: "companion eigenvalues",
        detail: "Schur form not triangular".into(),
    })?;
    Ok(eig
        .iter()
        .map(|&z| {
            let (p, dp) = horner(coeffs, z);
            if dp.norm() > 0.0 {
                let step = p / dp;
                if step.is_finite() && step.norm() < 1e-3 * (1.0 + z.norm()) {
                    return z - step;
                }
            }
            z
        })
        .collect())
}

/// One-variable Mahler measure `log|a_d| + Σ log⁺|ρ|`, also returning the number of
/// roots strictly outside the unit circle. Jensen's formula is applied to the
/// reversed polynomial when the leading coefficient is the smaller end, which keeps
/// roots near infinity well conditioned.
pub fn one_variable_measure(coeffs: &[Complex64]) -> Result<(f64, usize)> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return invalid("the Mahler measure of the zero polynomial is undefined");
    }
    let tiny = 1e-300;
    let lo = coeffs.iter().position(|c| c.norm() > tiny).expect("nonzero");
    let hi = coeffs.iter().rposition(|c| c.norm() > tiny).expect("nonzero");
    // Y^lo factors do not change the measure on |Y| = 1
    let core = &coeffs[lo..=hi];
    let d = core.len() - 1;
    if d == 0 {
        return Ok((core[0].norm().ln(), 0));
    }
    if core[d].norm() >= core[0].norm() {
        let roots = polynomial_roots(core)?;
        let outside = roots.iter().filter(|r| r.norm() > 1.0).count();
        let m = core[d].norm().ln() + roots.iter().map(|r| r.norm().ln().max(0.0)).sum::<f64>();
        Ok((m, outside))
    } else {
        let rev: Vec<Complex64> = core.iter().rev().copied().collect();
        let roots = polynomial_roots(&rev)?;
        // roots of the reversal are 1/ρ
        let inside = roots.iter().filter(|r| r.norm() > 1.0).count();
        let m = core[0].norm().ln() + roots.iter().map(|r| r.norm().ln().max(0.0)).sum::<f64>();
        Ok((m, d - inside))
    }
}

// ---------------------------------------------------------------------------
// Two variables
// ---------------------------------------------------------------------------

/// Outer quadrature parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MahlerControl {
    /// Absolute tolerance per panel.
    pub tol: f64,
    /// Uniform scan points used to detect root crossings.
    pub scan_points: usize,
    /// Bisection steps per crossing.
    pub bisection_steps: usize,
    /// Maximal recursion depth of the adaptive rule.
    pub max_depth: usize,
}

impl Default for MahlerControl {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            scan_points: 2048,
            bisection_steps: 60,
            max_depth: 40,
        }
    }
}

/// Value and diagnostics of a Mahler measure evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MahlerResult {
    pub value: f64,
    /// Detected crossing points in `[0, 1]`.
    pub breakpoints: Vec<f64>,
    pub panels: usize,
    pub control: MahlerControl,
}

fn inner(p: &BivariatePolynomial, u: f64) -> Result<(f64, usize)> {
    let x = Complex64::from_polar(1.0, 2.0 * PI * u);
    one_variable_measure(&p.y_coefficients(x))
}

/// `m(P)` by Jensen's formula in `Y` and adaptive quadrature in `X = e^{2πiu}`.
pub fn mahler_measure(p: &BivariatePolynomial, ctl: &MahlerControl) -> Result<MahlerResult> {
    if ctl.scan_points < 8 || !(ctl.tol > 0.0) {
        return invalid("need at least 8 scan points and a positive tolerance");
    }
    let (_, dy) = p.degrees();
    if dy == 0 {
        // P = Q(X): Jensen's formula in X
        let q: Vec<Complex64> = p.x_polynomial_of_y_degree(0).iter().map(|&c| Complex64::new(c as f64, 0.0)).collect();
        return Ok(MahlerResult {
            value: one_variable_measure(&q)?.0,
            breakpoints: Vec::new(),
            panels: 0,
            control: *ctl,
        });
    }
    // A factor c(X) of every Y-coefficient makes P(x, ·) vanish identically at the roots
    // of c; it is split off and measured in one variable.
    let (content, rest) = p.split_x_content()?;
    if content.len() > 1 {
        let inner_result = mahler_measure(&rest, ctl)?;
        let c: Vec<Complex64> = content.iter().map(|&c| Complex64::new(c as f64, 0.0)).collect();
        return Ok(MahlerResult {
            value: inner_result.value + one_variable_measure(&c)?.0,
            ..inner_result
        });
    }
    let m = ctl.scan_points;
    let grid: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
    let counts = crate::par::map_slice(&grid, |&u| inner(p, u).map(|r| r.1));
    let counts = counts.into_iter().collect::<Result<Vec<_>>>()?;
    let mut breakpoints = Vec::new();
    for k in 0..m {
        if counts[k] != counts[k + 1] {
            let (mut a, mut b) = (grid[k], grid[k + 1]);
            let ca = counts[k];
            for _ in 0..ctl.bisection_steps {
                let mid = 0.5 * (a + b);
                if inner(p, mid)?.1 == ca {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            breakpoints.push(0.5 * (a + b));
        }
    }
    let mut edges = vec![0.0];
    edges.extend(breakpoints.iter().copied());
    edges.push(1.0);
    // further split long panels so every panel is at most 1/16 long
    let mut panels = Vec::new();
    for w in edges.windows(2) {
        let pieces = ((w[1] - w[0]) * 16.0).ceil().max(1.0) as usize;
        for k in 0..pieces {
            let a = w[0] + (w[1] - w[0]) * k as f64 / pieces as f64;
            let b = w[0] + (w[1] - w[0]) * (k + 1) as f64 / pieces as f64;
            if b > a {
                panels.push((a, b));
            }
        }
    }
    let tol = ctl.tol / panels.len() as f64;
    let parts = crate::par::map_slice(&panels, |&(a, b)| {
        let f = |u: f64| inner(p, u).map(|r| r.0).unwrap_or(f64::NAN);
        adaptive_gauss_legendre(&f, a, b, tol, ctl.max_depth)
    });
    let mut value = 0.0;
    for part in parts {
        let v = part?;
        if !v.is_finite() {
            return Err(Error::NoConvergence {
                what: "Mahler measure",
                detail: "root finding failed inside a panel".into(),
            });
        }
        value += v;
    }
    Ok(MahlerResult {
        value,
        breakpoints,
        panels: panels.len(),
        control: *ctl,
    })
}

/// One identity `m(P) = (k/(4π²))·L(E, 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MahlerIdentity {
    pub polynomial: String,
    pub measure: f64,
    pub l_value: f64,
    /// The integer `k`.
    pub factor: u32,
    pub predicted: f64,
    pub rel_error: f64,
    pub seconds: f64,
    pub breakpoints: Vec<f64>,
}

/// `(X + Y + 1)(X + 1)(Y + 1) + XY`.
pub fn boyd_polynomial_77() -> BivariatePolynomial {
    BivariatePolynomial::parse("X^2 Y: 1; X Y^2: 1; X^2: 1; Y^2: 1; X Y: 4; X: 2; Y: 2; 1: 1").expect("valid literal")
}

/// `Y² + (X² + 2X − 1)Y + X³`.
pub fn boyd_polynomial_55() -> BivariatePolynomial {
    BivariatePolynomial::parse("Y^2: 1; X^2 Y: 1; X Y: 2; Y: -1; X^3: 1").expect("valid literal")
}

/// Evaluates both identities against `L(E, 2)` of the conductor-11 curve.
pub fn mahler_identity_checks(ctl: &MahlerControl, series: &SeriesControl, l_terms: usize) -> Result<Vec<MahlerIdentity>> {
    let curve = crate::elliptic::CurveModel::x1_11();
    let form = crate::lseries::ModularFormData::from_curve(&curve, l_terms)?;
    let l = crate::lseries::l_at_2(&form, series)?;
    let mut out = Vec::new();
    for (poly, k) in [(boyd_polynomial_77(), 77u32), (boyd_polynomial_55(), 55u32)] {
        let start = Instant::now();
        let r = mahler_measure(&poly, ctl)?;
        let predicted = k as f64 / (4.0 * PI * PI) * l;
        out.push(MahlerIdentity {
            polynomial: poly.to_string(),
            measure: r.value,
            l_value: l,
            factor: k,
            predicted,
            rel_error: (r.value - predicted).abs() / predicted.abs(),
            seconds: start.elapsed().as_secs_f64(),
            breakpoints: r.breakpoints,
        });
    }
    Ok(out)
}
