//! Elliptic curves over `Q`: Weierstrass invariants, point counts and
//! Dirichlet coefficients, the period lattice, lattice coordinates of
//! torsion points and the elliptic dilogarithm `D_E`.
//!
//! The lattice is normalised as `ω₁(Z + τZ)` with `ω₁ > 0` the real period,
//! `Im τ > 0` and `q = e^{2πiτ}` real. Real points are parametrised by
//! `u ∈ [0, ω₁)` through `(℘(u) − b₂/12, ℘′(u))`, where `℘′ = 2y + a₁x + a₃`;
//! along increasing `u` the coordinate `y` increases, which fixes the
//! orientation of `E(R)` and hence the sign of `D_E`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::is_prime;
use crate::error::{invalid, Error, Result};
use crate::specialfns::{bloch_wigner, SeriesControl};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Integral Weierstrass model `y² + a₁xy + a₃y = x³ + a₂x² + a₄x + a₆`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveModel {
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
    pub a4: i64,
    pub a6: i64,
    /// Conductor, supplied by the caller.
    pub conductor: u64,
}

impl CurveModel {
    /// Checked constructor rejecting singular models.
    pub fn new(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64, conductor: u64) -> Result<Self> {
        let c = Self {
            a1,
            a2,
            a3,
            a4,
            a6,
            conductor,
        };
        if c.discriminant() == 0 {
            return invalid(format!("model [{a1},{a2},{a3},{a4},{a6}] is singular"));
        }
        if conductor == 0 {
            return invalid("conductor must be positive");
        }
        Ok(c)
    }

    /// The curve `y² + y = x³ − x²` of conductor 11.
    pub fn x1_11() -> Self {
        Self {
            a1: 0,
            a2: -1,
            a3: 1,
            a4: 0,
            a6: 0,
            conductor: 11,
        }
    }

    /// The curve `y² + xy + y = x³ − x² − x − 14` of conductor 17.
    pub fn conductor_17() -> Self {
        Self {
            a1: 1,
            a2: -1,
            a3: 1,
            a4: -1,
            a6: -14,
            conductor: 17,
        }
    }

    /// `b₂ = a₁² + 4a₂`.
    pub fn b2(&self) -> i128 {
        let (a1, a2) = (self.a1 as i128, self.a2 as i128);
        a1 * a1 + 4 * a2
    }

    /// `b₄ = 2a₄ + a₁a₃`.
    pub fn b4(&self) -> i128 {
        2 * self.a4 as i128 + self.a1 as i128 * self.a3 as i128
    }

    /// `b₆ = a₃² + 4a₆`.
    pub fn b6(&self) -> i128 {
        let a3 = self.a3 as i128;
        a3 * a3 + 4 * self.a6 as i128
    }

    /// `b₈ = a₁²a₆ + 4a₂a₆ − a₁a₃a₄ + a₂a₃² − a₄²`.
    pub fn b8(&self) -> i128 {
        let (a1, a2, a3, a4, a6) = (
            self.a1 as i128,
            self.a2 as i128,
            self.a3 as i128,
            self.a4 as i128,
            self.a6 as i128,
        );
        a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    }

    /// Discriminant `Δ = −b₂²b₈ − 8b₄³ − 27b₆² + 9b₂b₄b₆`.
    pub fn discriminant(&self) -> i128 {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    /// `c₄ = b₂² − 24b₄`.
    pub fn c4(&self) -> i128 {
        let b2 = self.b2();
        b2 * b2 - 24 * self.b4()
    }

    /// `c₆ = −b₂³ + 36b₂b₄ − 216b₆`.
    pub fn c6(&self) -> i128 {
        let b2 = self.b2();
        -b2 * b2 * b2 + 36 * b2 * self.b4() - 216 * self.b6()
    }

    /// `j = c₄³/Δ` as a float.
    pub fn j_invariant(&self) -> f64 {
        let c4 = self.c4() as f64;
        c4 * c4 * c4 / self.discriminant() as f64
    }

    /// Whether the affine point `(x, y)` satisfies the equation (floating).
    pub fn residual(&self, x: f64, y: f64) -> f64 {
        let (a1, a2, a3, a4, a6) = (
            self.a1 as f64,
            self.a2 as f64,
            self.a3 as f64,
            self.a4 as f64,
            self.a6 as f64,
        );
        y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6)
    }

    /// Number of projective points of the reduction modulo `p` (singular
    /// points of a bad reduction included).
    pub fn count_points(&self, p: u64) -> Result<u64> {
        if !is_prime(p) {
            return invalid(format!("{p} is not prime"));
        }
        if p >= 1 << 31 {
            return invalid(format!("point counting is limited to p < 2³¹, got {p}"));
        }
        let mut count: u64 = 1;
        if p == 2 {
            let red = |v: i64| v.rem_euclid(2) as u64;
            let (a1, a2, a3, a4, a6) = (red(self.a1), red(self.a2), red(self.a3), red(self.a4), red(self.a6));
            for x in 0..2u64 {
                for y in 0..2u64 {
                    let lhs = y * y + a1 * x * y + a3 * y;
                    let rhs = x * x * x + a2 * x * x + a4 * x + a6;
                    if (lhs + rhs) % 2 == 0 {
                        count += 1;
                    }
                }
            }
            return Ok(count);
        }
        // (2y + a₁x + a₃)² = 4x³ + b₂x² + 2b₄x + b₆; walk the cubic by finite
        // differences and the squares by (y + 1)² = y² + 2y + 1.
        let mut square = vec![false; p as usize];
        let mut sq = 0u64;
        for y in 0..p {
            square[sq as usize] = true;
            sq += 2 * y + 1;
            while sq >= p {
                sq -= p;
            }
        }
        let red = |v: i128| v.rem_euclid(p as i128) as u64;
        let (b2, b4, b6) = (red(self.b2()), red(self.b4()), red(self.b6()));
        let cubic = |x: u64| ((((4 * x + b2) % p) * x % p + 2 * b4) % p * x % p + b6) % p;
        let (f0, f1, f2, f3) = (cubic(0), cubic(1), cubic(2), cubic(3));
        let sub = |u: u64, v: u64| (u + p - v) % p;
        let mut d0 = f0;
        let mut d1 = sub(f1, f0);
        let mut d2 = sub(sub(f2, f1), d1);
        let d3 = sub(sub(sub(f3, f2), sub(f2, f1)), d2);
        for _ in 0..p {
            count += if d0 == 0 {
                1
            } else if square[d0 as usize] {
                2
            } else {
                0
            };
            d0 += d1;
            if d0 >= p {
                d0 -= p;
            }
            d1 += d2;
            if d1 >= p {
                d1 -= p;
            }
            d2 += d3;
            if d2 >= p {
                d2 -= p;
            }
        }
        Ok(count)
    }

    /// `a_p = p + 1 − #E(F_p)`.
    pub fn a_p(&self, p: u64) -> Result<i64> {
        Ok(p as i64 + 1 - self.count_points(p)? as i64)
    }

    /// Dirichlet coefficients `a_1..a_nmax` (index 0 holds 0).
    pub fn an_coefficients(&self, nmax: usize) -> Result<Vec<i64>> {
        if nmax == 0 {
            return invalid("nmax must be at least 1");
        }
        let mut spf = vec![0usize; nmax + 1];
        for i in 2..=nmax {
            if spf[i] == 0 {
                let mut j = i;
                while j <= nmax {
                    if spf[j] == 0 {
                        spf[j] = i;
                    }
                    j += i;
                }
            }
        }
        let primes: Vec<usize> = (2..=nmax).filter(|&i| spf[i] == i).collect();
        let aps = crate::par::map_slice(&primes, |&p| self.a_p(p as u64));
        let mut a = vec![0i64; nmax + 1];
        a[1] = 1;
        for (&p, ap) in primes.iter().zip(aps) {
            a[p] = ap?;
        }
        for n in 2..=nmax {
            let p = spf[n];
            let mut m = n;
            let mut k = 0u32;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            if m > 1 {
                a[n] = a[m] * a[n / m];
                continue;
            }
            // n = p^k
            if k > 1 {
                let ap = a[p];
                let prev = a[n / p];
                a[n] = if self.conductor % p as u64 == 0 {
                    ap * prev
                } else {
                    ap * prev - p as i64 * a[n / (p * p)]
                };
            }
        }
        Ok(a)
    }
}

// ---------------------------------------------------------------------------
// Periods
// ---------------------------------------------------------------------------

/// Period lattice `ω₁(Z + τZ)` of a real curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodLattice {
    /// Real period `ω₁ > 0`.
    pub omega_plus: f64,
    /// Second period `ω₂ = τ·ω₁`.
    pub omega2: Complex64,
    /// `τ = ω₂/ω₁` with `Im τ > 0`.
    pub tau: Complex64,
    /// `q = e^{2πiτ}`, real with `|q| < 1`.
    pub q: f64,
    /// Shift `b₂/12` between `℘` and the model's `x`.
    pub x_shift: f64,
    /// Sign of the discriminant.
    pub disc_sign: i8,
}

fn agm(mut a: f64, mut b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::NoConvergence {
            what: "arithmetic-geometric mean",
            detail: format!("non-positive inputs {a}, {b}"),
        });
    }
    for _ in 0..100 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= 4.0 * f64::EPSILON * an {
            return Ok(an);
        }
        a = an;
        b = bn;
    }
    Err(Error::NoConvergence {
        what: "arithmetic-geometric mean",
        detail: format!("{a} and {b} still differ after 100 steps"),
    })
}

/// Real roots of `4X³ − g₂X − g₃`, sorted decreasingly.
fn weierstrass_real_roots(g2: f64, g3: f64) -> Vec<f64> {
    // X³ + pX + q with p = −g₂/4, q = −g₃/4.
    let p = -g2 / 4.0;
    let q = -g3 / 4.0;
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    let mut roots = if disc > 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let theta = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0).acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos())
            .collect::<Vec<_>>()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    };
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let f = *r * *r * *r + p * *r + q;
            let df = 3.0 * *r * *r + p;
            if df != 0.0 {
                *r -= f / df;
            }
        }
    }
    roots.sort_by(|a, b| b.partial_cmp(a).expect("finite roots"));
    roots
}

impl PeriodLattice {
    /// Periods by the arithmetic–geometric mean.
    pub fn new(curve: &CurveModel) -> Result<Self> {
        let c4 = curve.c4() as f64;
        let c6 = curve.c6() as f64;
        let g2 = c4 / 12.0;
        let g3 = c6 / 216.0;
        let disc = curve.discriminant();
        let roots = weierstrass_real_roots(g2, g3);
        let (omega1, omega2) = if disc > 0 {
            if roots.len() != 3 {
                return Err(Error::Inconsistent {
                    what: "period lattice",
                    detail: "positive discriminant without three real roots".into(),
                });
            }
            let (e1, e2, e3) = (roots[0], roots[1], roots[2]);
            let w1 = PI / agm((e1 - e3).sqrt(), (e1 - e2).sqrt())?;
            let w2 = Complex64::new(0.0, PI / agm((e1 - e3).sqrt(), (e2 - e3).sqrt())?);
            (w1, w2)
        } else {
            let e1 = roots[0];
            let a = 3.0 * e1;
            let b = (3.0 * e1 * e1 - g2 / 4.0).sqrt();
            let w1 = 2.0 * PI / agm(2.0 * b.sqrt(), (2.0 * b + a).sqrt())?;
            let w2 = Complex64::new(-w1 / 2.0, PI / agm(2.0 * b.sqrt(), (2.0 * b - a).sqrt())?);
            (w1, w2)
        };
        let tau = omega2 / omega1;
        let q = (2.0 * PI * I * tau).exp();
        if q.im.abs() > 1e-12 || q.re.abs() >= 1.0 {
            return Err(Error::Inconsistent {
                what: "period lattice",
                detail: format!("q = {q} is not real of modulus < 1"),
            });
        }
        Ok(Self {
            omega_plus: omega1,
            omega2,
            tau,
            q: q.re,
            x_shift: curve.b2() as f64 / 12.0,
            disc_sign: if disc > 0 { 1 } else { -1 },
        })
    }

    /// `q` as a complex number.
    fn qc(&self) -> Complex64 {
        Complex64::new(self.q, 0.0)
    }

    /// `j` from the Eisenstein series `E₄`, `E₆` in `q`.
    pub fn j_from_q(&self) -> f64 {
        let (e4, e6) = self.e4_e6();
        let e43 = e4 * e4 * e4;
        1728.0 * e43 / (e43 - e6 * e6)
    }

    /// `(E₄(τ), E₆(τ))`.
    pub fn e4_e6(&self) -> (f64, f64) {
        let q = self.q;
        let mut e4 = 1.0;
        let mut e6 = 1.0;
        let mut qn = 1.0;
        for n in 1..400u64 {
            qn *= q;
            if qn.abs() < 1e-30 {
                break;
            }
            let (mut s3, mut s5) = (0.0, 0.0);
            for d in 1..=n {
                if n % d == 0 {
                    let df = d as f64;
                    s3 += df.powi(3);
                    s5 += df.powi(5);
                }
            }
            e4 += 240.0 * s3 * qn;
            e6 -= 504.0 * s5 * qn;
        }
        (e4, e6)
    }

    /// `g₂` and `g₃` of the lattice from `E₄`, `E₆`.
    pub fn g2_g3(&self) -> (f64, f64) {
        let (e4, e6) = self.e4_e6();
        let k = 2.0 * PI / self.omega_plus;
        (k.powi(4) * e4 / 12.0, k.powi(6) * e6 / 216.0)
    }

    /// Multiplicative coordinate `w = e^{2πiu/ω₁}` of the class `(a + bτ)/n`.
    pub fn torsion_multiplier(&self, coord: &TorsionCoordinate) -> Complex64 {
        let n = coord.order as f64;
        let a = coord.a.rem_euclid(coord.order as i64) as f64;
        let b = coord.b.rem_euclid(coord.order as i64) as f64;
        (2.0 * PI * I * (a + b * self.tau) / n).exp()
    }

    /// Multiplicative coordinate of the real class `s + tτ` of `C/(Z + τZ)`.
    pub fn multiplier(&self, s: f64, t: f64) -> Complex64 {
        (2.0 * PI * I * (s + t * self.tau)).exp()
    }

    /// `(℘(u), ℘′(u))` at `u = ω₁·log(w)/(2πi)`, from the multiplicative coordinate.
    pub fn weierstrass_p(&self, w: Complex64, ctl: &SeriesControl) -> Result<(Complex64, Complex64)> {
        let w = self.reduce_multiplier(w);
        let q = self.qc();
        let k = 2.0 * PI * I / self.omega_plus;
        let g = |x: Complex64| x / ((1.0 - x) * (1.0 - x));
        let h = |x: Complex64| x * (1.0 + x) / ((1.0 - x) * (1.0 - x) * (1.0 - x));
        let mut p = Complex64::new(1.0 / 12.0, 0.0) + g(w);
        let mut dp = h(w);
        let winv = w.inv();
        let mut qn = Complex64::new(1.0, 0.0);
        let mut done = false;
        for _ in 1..ctl.max_terms {
            qn *= q;
            let x1 = qn * w;
            let x2 = qn * winv;
            let c = g(x1) + g(x2) - 2.0 * g(qn);
            let dc = h(x1) - h(x2);
            p += c;
            dp += dc;
            if c.norm() + dc.norm() < ctl.abs_tol * (p.norm() + dp.norm()) {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::TruncationCap {
                what: "Weierstrass q-series",
                cap: ctl.max_terms,
            });
        }
        Ok((k * k * p, k * k * k * dp))
    }

    /// Model coordinates `(x, 2y + a₁x + a₃)` of the point with multiplier `w`.
    pub fn model_point(&self, w: Complex64, ctl: &SeriesControl) -> Result<(Complex64, Complex64)> {
        let (p, dp) = self.weierstrass_p(w, ctl)?;
        Ok((p - self.x_shift, dp))
    }

    /// Moves `w` into the fundamental annulus `|q| < |w| ≤ 1`.
    pub fn reduce_multiplier(&self, w: Complex64) -> Complex64 {
        let lq = self.q.abs().ln();
        let t = (w.norm().ln() / lq).floor();
        if t == 0.0 {
            return w;
        }
        w * Complex64::new(self.q, 0.0).powf(-t)
    }
}

/// Period lattice of a curve.
pub fn periods(curve: &CurveModel) -> Result<PeriodLattice> {
    PeriodLattice::new(curve)
}

// ---------------------------------------------------------------------------
// Torsion coordinates
// ---------------------------------------------------------------------------

/// Torsion class `(a + bτ)/n` of the lattice `Z + τZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorsionCoordinate {
    pub order: u64,
    pub a: i64,
    pub b: i64,
}

impl TorsionCoordinate {
    /// Normalised constructor (`0 ≤ a, b < n`).
    pub fn new(order: u64, a: i64, b: i64) -> Result<Self> {
        if order == 0 {
            return invalid("torsion order must be positive");
        }
        let n = order as i64;
        Ok(Self {
            order,
            a: a.rem_euclid(n),
            b: b.rem_euclid(n),
        })
    }

    /// Group law on coordinates of a common order.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.order != other.order {
            return invalid("torsion coordinates must share an order");
        }
        Self::new(self.order, self.a + other.a, self.b + other.b)
    }

    /// `k·P`.
    pub fn scale(&self, k: i64) -> Self {
        let n = self.order as i64;
        Self {
            order: self.order,
            a: (self.a * k).rem_euclid(n),
            b: (self.b * k).rem_euclid(n),
        }
    }

    /// `−P`.
    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    /// True for the identity class.
    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }
}

/// Lattice coordinate of a rational torsion point `(x, y)` of order `n`.
///
/// Every non-zero class `(a + bτ)/n` is evaluated through the `℘` series;
/// candidates are matched on both `x` and `2y + a₁x + a₃` within `1e-6`
/// relative to the coordinate size, and the match must be unique.
pub fn torsion_coordinate(
    curve: &CurveModel,
    lattice: &PeriodLattice,
    point: (f64, f64),
    order: u64,
    ctl: &SeriesControl,
) -> Result<TorsionCoordinate> {
    if order < 2 {
        return invalid("torsion matching needs a point of order at least 2");
    }
    if order > 12 {
        return invalid("torsion orders above 12 do not occur over Q");
    }
    let (x, y) = point;
    if curve.residual(x, y).abs() > 1e-9 * (1.0 + x.abs().powi(3)) {
        return invalid(format!("({x}, {y}) is not on the curve"));
    }
    let yp = 2.0 * y + curve.a1 as f64 * x + curve.a3 as f64;
    let mut matches = Vec::new();
    let n = order as i64;
    for a in 0..n {
        for b in 0..n {
            if a == 0 && b == 0 {
                continue;
            }
            let coord = TorsionCoordinate::new(order, a, b)?;
            let w = lattice.torsion_multiplier(&coord);
            let (xc, ypc) = lattice.model_point(w, ctl)?;
            let ex = (xc - x).norm() / (1.0 + x.abs());
            let ey = (ypc - yp).norm() / (1.0 + yp.abs());
            if ex < 1e-6 && ey < 1e-6 {
                matches.push(coord);
            }
        }
    }
    match matches.len() {
        1 => Ok(matches[0]),
        0 => Err(Error::Inconsistent {
            what: "torsion matching",
            detail: format!("no class of order {order} matches ({x}, {y})"),
        }),
        k => Err(Error::Inconsistent {
            what: "torsion matching",
            detail: format!("{k} classes match ({x}, {y})"),
        }),
    }
}

// ---------------------------------------------------------------------------
// Elliptic dilogarithm
// ---------------------------------------------------------------------------

fn bloch_wigner_tail_bound(r: f64) -> f64 {
    // |D(w)| ≤ |Im Li₂(w)| + π·|log|w|| ≤ r/(1−r) + π·r·|log r|/(1−r) for |w| = r < 1 … up to
    // the crude factor 2 absorbing arg(1−w) ≤ arcsin(r).
    if r >= 1.0 {
        return f64::INFINITY;
    }
    2.0 * r * (1.0 + r.ln().abs()) / (1.0 - r)
}

/// `D_E([x]) = Σ_{n∈Z} D(x·qⁿ)` for a multiplicative coordinate `x ∈ C*`.
///
/// After moving `x` into `|q| < |x| ≤ 1` the sum is split into
/// `Σ_{n≥0} D(xqⁿ) − Σ_{n≥1} D(x⁻¹qⁿ)`, both truncated once the bound on the
/// next term falls below `abs_tol`.
pub fn elliptic_dilog(lattice: &PeriodLattice, x: Complex64, ctl: &SeriesControl) -> Result<f64> {
    if x.norm() == 0.0 || !x.re.is_finite() || !x.im.is_finite() {
        return invalid("elliptic dilogarithm needs x in C*");
    }
    let x = lattice.reduce_multiplier(x);
    let q = Complex64::new(lattice.q, 0.0);
    let qa = lattice.q.abs();
    let xinv = x.inv();
    let mut sum = bloch_wigner(x);
    let mut qn = Complex64::new(1.0, 0.0);
    for _ in 1..ctl.max_terms {
        qn *= q;
        let r1 = qn.norm() * x.norm();
        let r2 = qn.norm() * xinv.norm();
        sum += bloch_wigner(qn * x) - bloch_wigner(qn * xinv);
        let next = bloch_wigner_tail_bound(r1 * qa) + bloch_wigner_tail_bound(r2 * qa);
        if next < ctl.abs_tol {
            return Ok(sum);
        }
    }
    Err(Error::TruncationCap {
        what: "elliptic dilogarithm",
        cap: ctl.max_terms,
    })
}

/// `D_E` at a torsion class.
pub fn elliptic_dilog_torsion(lattice: &PeriodLattice, coord: &TorsionCoordinate, ctl: &SeriesControl) -> Result<f64> {
    if coord.is_zero() {
        return Ok(0.0);
    }
    elliptic_dilog(lattice, lattice.torsion_multiplier(coord), ctl)
}

/// Orientation convention for the intersection pairing in the Kronecker
/// series: `⟨m + nτ, s + tτ⟩ = sign·(m·t − n·s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingSign {
    Plus,
    Minus,
}

/// Truncated Eisenstein–Kronecker series
/// `−(Im τ)²/π · Re Σ′_{|λ|≤R} χ_λ(P)/(λ²·λ̄)` over `λ = m + nτ`.
///
/// The absolutely convergent tail is `O(1/R)`; this is an independent, low
/// accuracy oracle for [`elliptic_dilog`].
pub fn dilog_kronecker_oracle(
    lattice: &PeriodLattice,
    coord: &TorsionCoordinate,
    radius: f64,
    sign: PairingSign,
) -> Result<f64> {
    if radius < 50.0 {
        return invalid("Kronecker oracle radius must be at least 50");
    }
    let tau = lattice.tau;
    let s = coord.a as f64 / coord.order as f64;
    let t = coord.b as f64 / coord.order as f64;
    let eps = match sign {
        PairingSign::Plus => 1.0,
        PairingSign::Minus => -1.0,
    };
    let nmax = (radius / tau.im).ceil() as i64;
    let mut total = 0.0;
    for n in -nmax..=nmax {
        let shift = n as f64 * tau.re;
        let h = n as f64 * tau.im;
        let span = (radius * radius - h * h).max(0.0).sqrt();
        let m_lo = (-span - shift).ceil() as i64;
        let m_hi = (span - shift).floor() as i64;
        let mut row = 0.0;
        for m in m_lo..=m_hi {
            if m == 0 && n == 0 {
                continue;
            }
            let lam = Complex64::new(m as f64, 0.0) + n as f64 * tau;
            let phase = 2.0 * PI * eps * (m as f64 * t - n as f64 * s);
            let chi = Complex64::from_polar(1.0, phase);
            row += (chi / (lam * lam * lam.conj())).re;
        }
        total += row;
    }
    Ok(-(tau.im * tau.im) / PI * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eleven_a_invariants() {
        let e = CurveModel::x1_11();
        assert_eq!(e.discriminant(), -11);
        assert_eq!(e.c4(), 16);
        assert_eq!(e.a_p(2).unwrap(), -2);
        assert_eq!(e.a_p(3).unwrap(), -1);
        assert_eq!(e.a_p(5).unwrap(), 1);
        assert_eq!(e.a_p(11).unwrap(), 1);
    }

    #[test]
    fn roots_sorted() {
        let r = weierstrass_real_roots(4.0, 0.0); // 4X³ − 4X
        assert_eq!(r.len(), 3);
        assert!((r[0] - 1.0).abs() < 1e-14 && r[1].abs() < 1e-14 && (r[2] + 1.0).abs() < 1e-14);
    }
}
