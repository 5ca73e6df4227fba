//! Manin symbols for `Γ₁(N)` and periods of weight-2 forms.
//!
//! Symbols are indexed by `E_N`, the pairs `(u, v) ∈ (Z/NZ)²` of exact order
//! `N`, taken modulo `±`. The symbol `ξ(x)` is the geodesic `{g_x·0, g_x·∞}`
//! for any `g_x ∈ SL₂(Z)` with bottom row `≡ x`. Relations are
//! `ξ(x) + ξ(xσ) = 0` and `ξ(x) + ξ(xτ) + ξ(xτ²) = 0`, the boundary is
//! `∂ξ(x) = [x] − [xσ]` on cusp classes `E_N/±Γ∞`. All of this is exact over
//! `Q`; floating point only enters through the period values `ξ_f`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::characters::{enumerate_characters, euler_phi, factorize, gauss_sum, inv_mod, is_prime};
use crate::eisenstein::UnimodularMatrix;
use crate::error::{invalid, Error, Result};
use crate::lseries::{eval_form, lambda_value, ModularFormData};
use crate::specialfns::{adaptive_gauss_legendre, SeriesControl};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

// ---------------------------------------------------------------------------
// Indices and cusps
// ---------------------------------------------------------------------------

/// An element `(u, v)` of `E_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolIndex {
    pub level: i64,
    pub u: i64,
    pub v: i64,
}

impl SymbolIndex {
    /// Reduced pair; rejects pairs whose order is not `N`.
    pub fn new(level: i64, u: i64, v: i64) -> Result<Self> {
        if level < 1 {
            return invalid("level must be positive");
        }
        let (u, v) = (u.rem_euclid(level), v.rem_euclid(level));
        if u.gcd(&v).gcd(&level) != 1 {
            return invalid(format!("({u}, {v}) does not have order {level}"));
        }
        Ok(Self { level, u, v })
    }

    /// Representative of the class modulo `±`.
    pub fn canonical(&self) -> Self {
        let n = self.level;
        let neg = ((-self.u).rem_euclid(n), (-self.v).rem_euclid(n));
        if neg < (self.u, self.v) {
            Self {
                level: n,
                u: neg.0,
                v: neg.1,
            }
        } else {
            *self
        }
    }

    /// Right action `x ↦ x·g`.
    pub fn act(&self, g: &UnimodularMatrix) -> Self {
        let (u, v) = g.act_row((self.u, self.v), self.level);
        Self { level: self.level, u, v }
    }

    /// Canonical `g_x ∈ SL₂(Z)` with bottom row `≡ (u, v)`.
    pub fn lift(&self) -> UnimodularMatrix {
        UnimodularMatrix::from_bottom_row(self.u, self.v, self.level).expect("validated index")
    }
}

/// All of `E_N` in lexicographic order.
pub fn symbol_indices(level: i64) -> Vec<SymbolIndex> {
    let mut out = Vec::new();
    for u in 0..level {
        for v in 0..level {
            if u.gcd(&v).gcd(&level) == 1 {
                out.push(SymbolIndex { level, u, v });
            }
        }
    }
    out
}

/// Representatives of `E_N/±`, in lexicographic order.
pub fn symbol_classes(level: i64) -> Vec<SymbolIndex> {
    symbol_indices(level).into_iter().filter(|x| x.canonical() == *x).collect()
}

/// Kind of a cusp class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CuspKind {
    /// `∞ = [0, 1]`.
    Infinity,
    /// `P_v = [0, v]`, `v ≠ ±1`.
    P,
    /// `Q_v = [v, 0]`.
    Q,
    /// Any other class.
    Other,
}

/// A cusp of `X₁(N)` as a class of `E_N` under `±Γ∞`, `(u, v)·Tⁿ = (u, v + nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CuspClass {
    pub level: i64,
    pub u: i64,
    pub v: i64,
    /// `gcd(u, N)`.
    pub gcd: i64,
    /// Size of the `Γ∞`-orbit of the representative.
    pub width: i64,
    pub kind: CuspKind,
}

fn cusp_key(level: i64, u: i64, v: i64) -> (i64, i64) {
    let mut best = (i64::MAX, i64::MAX);
    for s in [1, -1] {
        let (uu, vv) = ((s * u).rem_euclid(level), (s * v).rem_euclid(level));
        for k in 0..level {
            let cand = (uu, (vv + k * uu).rem_euclid(level));
            if cand < best {
                best = cand;
            }
        }
    }
    best
}

/// Cusp classes with lookup from any element of `E_N`.
#[derive(Debug, Clone)]
pub struct CuspTable {
    pub level: i64,
    pub classes: Vec<CuspClass>,
    index: HashMap<(i64, i64), usize>,
}

impl CuspTable {
    /// Orbit decomposition of `E_N`.
    pub fn new(level: i64) -> Result<Self> {
        if level < 1 {
            return invalid("level must be positive");
        }
        let mut classes = Vec::new();
        let mut index = HashMap::new();
        let mut key_to_class: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        for x in symbol_indices(level) {
            let key = cusp_key(level, x.u, x.v);
            let next = key_to_class.len();
            let id = *key_to_class.entry(key).or_insert(next);
            if id == classes.len() {
                let (u, v) = key;
                let g = u.gcd(&level);
                let kind = if u == 0 && (v == 1 % level || v == level - 1) {
                    CuspKind::Infinity
                } else if u == 0 {
                    CuspKind::P
                } else if v == 0 {
                    CuspKind::Q
                } else {
                    CuspKind::Other
                };
                classes.push(CuspClass {
                    level,
                    u,
                    v,
                    gcd: g,
                    width: if u == 0 { 1 } else { level / g },
                    kind,
                });
            }
            index.insert((x.u, x.v), id);
        }
        Ok(Self { level, classes, index })
    }

    /// Class of `(u, v)`.
    pub fn class_of(&self, u: i64, v: i64) -> Option<usize> {
        self.index.get(&(u.rem_euclid(self.level), v.rem_euclid(self.level))).copied()
    }

    /// Number of cusps.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    /// True for an empty table (never for valid levels).
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Cusp classes of `X₁(N)`.
pub fn cusp_classes(level: i64) -> Result<Vec<CuspClass>> {
    Ok(CuspTable::new(level)?.classes)
}

// ---------------------------------------------------------------------------
// Exact linear algebra
// ---------------------------------------------------------------------------

type Q = BigRational;

fn q(k: i64) -> Q {
    Q::from_integer(BigInt::from(k))
}

/// Reduced row echelon form; returns the non-zero rows and their pivot columns.
fn rref(mut rows: Vec<Vec<Q>>, ncols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Basis of `{x : M x = 0}` for `M` given by rows.
fn nullspace(rows: Vec<Vec<Q>>, ncols: usize) -> Vec<Vec<Q>> {
    let (red, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (row, &p) in red.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Characteristic polynomial `det(X − A)` (coefficients low degree first), Faddeev–LeVerrier.
pub fn characteristic_polynomial(a: &[Vec<Q>]) -> Vec<Q> {
    let n = a.len();
    let mut coeffs = vec![Q::zero(); n + 1];
    coeffs[n] = Q::one();
    let mut m = vec![vec![Q::zero(); n]; n];
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1} I
        let mut next = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Q::zero();
                for l in 0..n {
                    if !a[i][l].is_zero() && !m[l][j].is_zero() {
                        s += &a[i][l] * &m[l][j];
                    }
                }
                next[i][j] = s;
            }
            next[i][i] += &coeffs[n - k + 1];
        }
        m = next;
        // c_{n−k} = −tr(A·M_k)/k
        let mut tr = Q::zero();
        for i in 0..n {
            for l in 0..n {
                if !a[i][l].is_zero() && !m[l][i].is_zero() {
                    tr += &a[i][l] * &m[l][i];
                }
            }
        }
        coeffs[n - k] = -tr / q(k as i64);
    }
    coeffs
}

// ---------------------------------------------------------------------------
// Symbol vectors and operators
// ---------------------------------------------------------------------------

/// Finite rational combination of Manin symbols, keyed by canonical indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolVector {
    pub level: i64,
    pub coeffs: BTreeMap<(i64, i64), Q>,
}

impl SymbolVector {
    /// Zero vector.
    pub fn zero(level: i64) -> Self {
        Self {
            level,
            coeffs: BTreeMap::new(),
        }
    }

    /// The single symbol `ξ(u, v)`; pairs outside `E_N` give zero.
    pub fn basis(level: i64, u: i64, v: i64) -> Self {
        let mut out = Self::zero(level);
        out.add_symbol(u, v, q(1));
        out
    }

    /// `self += c·ξ(u, v)`; ignored for pairs outside `E_N`.
    pub fn add_symbol(&mut self, u: i64, v: i64, c: Q) {
        let Ok(x) = SymbolIndex::new(self.level, u, v) else {
            return;
        };
        let x = x.canonical();
        let e = self.coeffs.entry((x.u, x.v)).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&(x.u, x.v));
        }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, other: &Self, c: &Q) -> Self {
        let mut out = self.clone();
        for (&(u, v), k) in &other.coeffs {
            out.add_symbol(u, v, c * k);
        }
        out
    }
}

/// `T₂ξ(u, v) = ξ(2u, v) + ξ(u, 2v) + ξ(2u, u + v) + ξ(u + v, 2v)`, with
/// `ξ(u′, v′) = 0` for pairs outside `E_N`.
pub fn hecke_t2(x: &SymbolVector) -> SymbolVector {
    let mut out = SymbolVector::zero(x.level);
    for (&(u, v), c) in &x.coeffs {
        for (a, b) in [(2 * u, v), (u, 2 * v), (2 * u, u + v), (u + v, 2 * v)] {
            out.add_symbol(a, b, c.clone());
        }
    }
    out
}

/// Diamond operator `⟨d⟩ξ(u, v) = ξ(du, dv)`.
pub fn diamond(d: i64, x: &SymbolVector) -> Result<SymbolVector> {
    if d.gcd(&x.level) != 1 {
        return invalid(format!("{d} is not a unit modulo {}", x.level));
    }
    let mut out = SymbolVector::zero(x.level);
    for (&(u, v), c) in &x.coeffs {
        out.add_symbol(d * u, d * v, c.clone());
    }
    Ok(out)
}

/// Dimension data of the Manin-symbol quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientDims {
    /// `|E_N/±|`.
    pub symbols: usize,
    pub relation_rank: usize,
    /// Dimension of the quotient by the relations.
    pub quotient: usize,
    pub boundary_rank: usize,
    /// Dimension of the kernel of the boundary on the quotient.
    pub cuspidal: usize,
}

/// The quotient of the free space on `E_N/±` by the Manin relations,
/// with its boundary map and cuspidal subspace.
#[derive(Debug, Clone)]
pub struct ManinSpace {
    pub level: i64,
    classes: Vec<SymbolIndex>,
    index: HashMap<(i64, i64), usize>,
    relations: Vec<Vec<Q>>,
    pivots: Vec<usize>,
    free: Vec<usize>,
    cusps: CuspTable,
    boundary_rank: usize,
    /// Cuspidal basis in free coordinates.
    cuspidal: Vec<Vec<Q>>,
}

impl ManinSpace {
    /// Builds the space with the classes enumerated in the given order.
    pub fn with_order(level: i64, classes: Vec<SymbolIndex>) -> Result<Self> {
        if level < 1 {
            return invalid("level must be positive");
        }
        let n = classes.len();
        let index: HashMap<(i64, i64), usize> = classes.iter().enumerate().map(|(i, x)| ((x.u, x.v), i)).collect();
        if index.len() != n || symbol_classes(level).len() != n {
            return invalid("class list must enumerate E_N/± exactly once");
        }
        let pos = |x: SymbolIndex| index[&{
            let c = x.canonical();
            (c.u, c.v)
        }];
        let sigma = UnimodularMatrix::sigma();
        let tau = UnimodularMatrix::tau();
        let tau2 = tau.mul(&tau);
        let mut rows = Vec::new();
        for x in &classes {
            let mut r = vec![Q::zero(); n];
            r[pos(*x)] += q(1);
            r[pos(x.act(&sigma))] += q(1);
            rows.push(r);
            let mut r = vec![Q::zero(); n];
            r[pos(*x)] += q(1);
            r[pos(x.act(&tau))] += q(1);
            r[pos(x.act(&tau2))] += q(1);
            rows.push(r);
        }
        let (relations, pivots) = rref(rows, n);
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let cusps = CuspTable::new(level)?;
        // boundary restricted to free coordinates: columns = free symbols, rows = cusps
        let mut bmat = vec![vec![Q::zero(); free.len()]; cusps.len()];
        for (j, &f) in free.iter().enumerate() {
            let x = classes[f];
            let xs = x.act(&sigma);
            let a = cusps.class_of(x.u, x.v).expect("element of E_N");
            let b = cusps.class_of(xs.u, xs.v).expect("element of E_N");
            bmat[a][j] += q(1);
            bmat[b][j] -= q(1);
        }
        let boundary_rank = rref(bmat.clone(), free.len()).1.len();
        let cuspidal = nullspace(bmat, free.len());
        Ok(Self {
            level,
            classes,
            index,
            relations,
            pivots,
            free,
            cusps,
            boundary_rank,
            cuspidal,
        })
    }

    /// Space with the lexicographic class order.
    pub fn new(level: i64) -> Result<Self> {
        Self::with_order(level, symbol_classes(level))
    }

    /// Dimension data.
    pub fn dims(&self) -> QuotientDims {
        QuotientDims {
            symbols: self.classes.len(),
            relation_rank: self.pivots.len(),
            quotient: self.free.len(),
            boundary_rank: self.boundary_rank,
            cuspidal: self.cuspidal.len(),
        }
    }

    /// Cusp table used by the boundary map.
    pub fn cusps(&self) -> &CuspTable {
        &self.cusps
    }

    /// Coordinates of a symbol vector in the quotient (free coordinates).
    pub fn project(&self, x: &SymbolVector) -> Vec<Q> {
        let mut full = vec![Q::zero(); self.classes.len()];
        for (k, c) in &x.coeffs {
            full[self.index[k]] += c;
        }
        for (row, &p) in self.relations.iter().zip(&self.pivots) {
            if !full[p].is_zero() {
                let f = full[p].clone();
                for (x, y) in full.iter_mut().zip(row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        self.free.iter().map(|&f| full[f].clone()).collect()
    }

    /// Boundary of a symbol vector as coefficients on cusp classes.
    pub fn boundary(&self, x: &SymbolVector) -> Vec<Q> {
        let sigma = UnimodularMatrix::sigma();
        let mut out = vec![Q::zero(); self.cusps.len()];
        for (&(u, v), c) in &x.coeffs {
            let s = SymbolIndex { level: self.level, u, v }.act(&sigma);
            out[self.cusps.class_of(u, v).expect("E_N")] += c;
            out[self.cusps.class_of(s.u, s.v).expect("E_N")] -= c;
        }
        out
    }

    fn lift(&self, coords: &[Q]) -> SymbolVector {
        let mut out = SymbolVector::zero(self.level);
        for (c, &f) in coords.iter().zip(&self.free) {
            if !c.is_zero() {
                let x = self.classes[f];
                out.add_symbol(x.u, x.v, c.clone());
            }
        }
        out
    }

    /// Cuspidal basis vectors as symbol combinations.
    pub fn cuspidal_basis(&self) -> Vec<SymbolVector> {
        self.cuspidal.iter().map(|c| self.lift(c)).collect()
    }

    fn solve_in_cuspidal(&self, target: &[Q]) -> Result<Vec<Q>> {
        let k = self.cuspidal.len();
        let m = self.free.len();
        // augmented system with columns = cuspidal basis vectors
        let rows: Vec<Vec<Q>> = (0..m)
            .map(|i| {
                let mut r: Vec<Q> = self.cuspidal.iter().map(|b| b[i].clone()).collect();
                r.push(target[i].clone());
                r
            })
            .collect();
        let (red, pivots) = rref(rows, k + 1);
        if pivots.contains(&k) {
            return Err(Error::Inconsistent {
                what: "Manin symbols",
                detail: "image leaves the cuspidal subspace".into(),
            });
        }
        let mut sol = vec![Q::zero(); k];
        for (row, &p) in red.iter().zip(&pivots) {
            sol[p] = row[k].clone();
        }
        Ok(sol)
    }

    /// Matrix (columns = images) of an operator on the cuspidal subspace.
    pub fn cuspidal_matrix<F: Fn(&SymbolVector) -> Result<SymbolVector>>(&self, op: F) -> Result<Vec<Vec<Q>>> {
        let k = self.cuspidal.len();
        let mut mat = vec![vec![Q::zero(); k]; k];
        for (j, b) in self.cuspidal_basis().iter().enumerate() {
            let img = self.project(&op(b)?);
            let col = self.solve_in_cuspidal(&img)?;
            for (i, c) in col.into_iter().enumerate() {
                mat[i][j] = c;
            }
        }
        Ok(mat)
    }

    /// `T₂` on the cuspidal subspace.
    pub fn t2_cuspidal(&self) -> Result<Vec<Vec<Q>>> {
        self.cuspidal_matrix(|x| Ok(hecke_t2(x)))
    }

    /// `⟨d⟩` on the cuspidal subspace.
    pub fn diamond_cuspidal(&self, d: i64) -> Result<Vec<Vec<Q>>> {
        self.cuspidal_matrix(|x| diamond(d, x))
    }

    /// Matrix of an operator on the full quotient.
    pub fn quotient_matrix<F: Fn(&SymbolVector) -> Result<SymbolVector>>(&self, op: F) -> Result<Vec<Vec<Q>>> {
        let m = self.free.len();
        let mut mat = vec![vec![Q::zero(); m]; m];
        for j in 0..m {
            let mut e = vec![Q::zero(); m];
            e[j] = Q::one();
            let img = self.project(&op(&self.lift(&e))?);
            for (i, c) in img.into_iter().enumerate() {
                mat[i][j] = c;
            }
        }
        Ok(mat)
    }
}

/// Exact matrix product.
pub fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![Q::zero(); m]; n];
    for i in 0..n {
        for (l, bl) in b.iter().enumerate() {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if !bl[j].is_zero() {
                    out[i][j] += &a[i][l] * &bl[j];
                }
            }
        }
    }
    out
}

/// `(|E_N/±|, cuspidal dimension)`.
pub fn relation_quotient_dims(level: i64) -> Result<(usize, usize)> {
    let d = ManinSpace::new(level)?.dims();
    Ok((d.symbols, d.cuspidal))
}

/// Genus of `X₁(N)` from the classical formula (independent of the symbols).
pub fn genus_x1(level: u64) -> Result<u64> {
    if level == 0 {
        return invalid("level must be positive");
    }
    if level <= 4 {
        return Ok(0);
    }
    let n = level as i64;
    let mut index = q(n * n) / q(24);
    for (p, _) in factorize(level) {
        let p = p as i64;
        index *= q(p * p - 1) / q(p * p);
    }
    let mut s = 0u64;
    for d in 1..=level {
        if level % d == 0 {
            s += euler_phi(d) * euler_phi(level / d);
        }
    }
    let g = q(1) + index - q(s as i64) / q(4);
    if !g.is_integer() || g.is_negative() {
        return Err(Error::Inconsistent {
            what: "genus formula",
            detail: format!("non-integral genus {g} at level {level}"),
        });
    }
    Ok(g.to_integer().try_into().expect("small genus"))
}

// ---------------------------------------------------------------------------
// Period values
// ---------------------------------------------------------------------------

/// Homogeneous function on `P¹(F_p)`, stored at `x = u/v` (`0..p`) and `∞` (index `p`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiTable {
    pub level: i64,
    pub values: Vec<Complex64>,
}

impl XiTable {
    /// Index of `(u : v)` in `P¹(F_p)`.
    pub fn slot(level: i64, u: i64, v: i64) -> Result<usize> {
        let (u, v) = (u.rem_euclid(level), v.rem_euclid(level));
        if v == 0 {
            if u == 0 {
                return invalid("(0, 0) is not in P¹");
            }
            return Ok(level as usize);
        }
        let inv = inv_mod(v, level).ok_or_else(|| Error::InvalidInput(format!("{v} is not invertible mod {level}")))?;
        Ok((u * inv).rem_euclid(level) as usize)
    }

    /// `ξ_f(u, v)`.
    pub fn value(&self, u: i64, v: i64) -> Result<Complex64> {
        Ok(self.values[Self::slot(self.level, u, v)?])
    }

    /// `ξ_f⁺(u, v) = (ξ_f(u, v) + ξ_f(−u, v))/2`.
    pub fn plus(&self, u: i64, v: i64) -> Result<Complex64> {
        Ok(0.5 * (self.value(u, v)? + self.value(-u, v)?))
    }

    /// `ξ_f⁻(u, v)`.
    pub fn minus(&self, u: i64, v: i64) -> Result<Complex64> {
        Ok(0.5 * (self.value(u, v)? - self.value(-u, v)?))
    }
}

/// `ξ_f` on `P¹(F_p)` from twisted central values:
/// `ξ_f(x) = (w/(p−1)) Σ_{χ≠1} (τ(χ̄)/p) χ̄(x) Λ(f⊗χ, 1)` for `x = u/v ≠ 0, ∞`,
/// `ξ_f(∞) = (w/2π) L(f, 1)` and `ξ_f(0) = −ξ_f(∞)`.
pub fn xi_table_bridge(form: &ModularFormData, ctl: &SeriesControl) -> Result<XiTable> {
    let p = form.level();
    if !is_prime(p) {
        return invalid("the period bridge needs prime level");
    }
    let w = form.root_number(ctl)?;
    let pf = p as f64;
    let table = crate::lseries::twisted_lambda_table(form, ctl)?;
    let mut values = vec![Complex64::new(0.0, 0.0); p as usize + 1];
    for (x, slot) in values.iter_mut().enumerate().take(p as usize).skip(1) {
        let mut s = Complex64::new(0.0, 0.0);
        for (chi, lam) in table.iter().filter(|(c, _)| !c.is_trivial()) {
            s += gauss_sum(&chi.conj()) / pf * chi.value(x as i64).conj() * lam;
        }
        *slot = w / (pf - 1.0) * s;
    }
    let lam1 = table.iter().find(|(c, _)| c.is_trivial()).map(|(_, v)| *v).expect("trivial character");
    // L(f, 1) = (2π/√p)·Λ(f, 1)
    let at_inf = w * lam1 / pf.sqrt();
    values[p as usize] = at_inf;
    values[0] = -at_inf;
    Ok(XiTable { level: p as i64, values })
}

/// `ξ_f(u, v)` from the bridge.
pub fn xi_f(form: &ModularFormData, u: i64, v: i64, ctl: &SeriesControl) -> Result<Complex64> {
    xi_table_bridge(form, ctl)?.value(u, v)
}

/// Evaluates a trivial-character form of prime level anywhere in `H`.
///
/// `z = g·z₀` with `z₀` in the standard fundamental domain; writing
/// `Γ₀(p)g = Γ₀(p)·S·T^j` when `p ∤ c` and using `f|S(z) = (w/p)·f(z/p)` the
/// value is `(cz₀ + d)²·(w/p)·f((z₀ + j)/p)`, evaluated at height `≥ √3/(2p)`.
#[derive(Debug, Clone)]
pub struct FormEvaluator {
    form: ModularFormData,
    w: Complex64,
    ctl: SeriesControl,
    /// Smallest height accepted for the q-expansion.
    pub min_height: f64,
    /// Maximum number of reduction steps.
    pub max_steps: usize,
}

impl FormEvaluator {
    /// Evaluator with the documented height threshold 0.05 and 40 reduction steps.
    pub fn new(form: &ModularFormData, ctl: &SeriesControl) -> Result<Self> {
        if !is_prime(form.level()) {
            return invalid("pointwise evaluation is implemented for prime level");
        }
        let w = form.root_number(ctl)?;
        Ok(Self {
            form: form.clone(),
            w,
            ctl: *ctl,
            min_height: 0.05,
            max_steps: 40,
        })
    }

    /// `f(z)`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) {
            return invalid("point must lie in the upper half-plane");
        }
        if z.im >= 1.0 {
            return eval_form(&self.form, z, &self.ctl);
        }
        let mut g = UnimodularMatrix::identity();
        let mut z0 = z;
        let mut steps = 0;
        loop {
            let n = z0.re.round();
            z0 -= n;
            g = g.mul(&UnimodularMatrix {
                a: 1,
                b: n as i64,
                c: 0,
                d: 1,
            });
            if z0.norm_sqr() >= 1.0 - 1e-15 {
                break;
            }
            z0 = -z0.inv();
            g = g.mul(&UnimodularMatrix::sigma());
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::NoConvergence {
                    what: "SL₂(Z) reduction",
                    detail: format!("{z} not reduced after {} steps", self.max_steps),
                });
            }
        }
        let p = self.form.level() as i64;
        let j_factor = (g.c as f64 * z0 + g.d as f64).powi(2);
        if g.c.rem_euclid(p) == 0 {
            return Ok(j_factor * eval_form(&self.form, z0, &self.ctl)?);
        }
        let j = (g.d * inv_mod(g.c, p).expect("prime level")).rem_euclid(p);
        let arg = (z0 + j as f64) / p as f64;
        if arg.im < self.min_height {
            return Err(Error::NoConvergence {
                what: "pointwise evaluation",
                detail: format!("reduced height {} below {}", arg.im, self.min_height),
            });
        }
        Ok(j_factor * self.w / p as f64 * eval_form(&self.form, arg, &self.ctl)?)
    }

    /// `F(z) = ∫_z^{i∞} f(t) dt = (i/2π) Σ (a_n/n) e^{2πinz}` for `Im z` large enough.
    pub fn antiderivative_at(&self, z: Complex64) -> Result<Complex64> {
        let coeffs: Vec<Complex64> = self
            .form
            .coefficients()
            .iter()
            .enumerate()
            .map(|(n, a)| if n == 0 { *a } else { a / n as f64 })
            .collect();
        let tmp = ModularFormData::new(self.form.level(), coeffs.clone(), coeffs, "antiderivative")?;
        Ok(I / (2.0 * PI) * eval_form(&tmp, z, &self.ctl)?)
    }

    /// `∫_r^{i∞} f(z) dz` for the cusp `r = num/den`, as `F(r + iT) + i∫₀^T f(r + it) dt`.
    pub fn integral_to_infinity(&self, num: i64, den: i64, tol: f64) -> Result<Complex64> {
        if den == 0 {
            return invalid("the cusp at infinity has no vertical path");
        }
        let r = num as f64 / den as f64;
        let t_top = 0.5;
        let head = self.antiderivative_at(Complex64::new(r, t_top))?;
        // geometric panels towards the cusp: |f(r + it)| ≲ (den·t)⁻²·exp(−2π/(den²·t·N)),
        // negligible once the exponent passes 60
        let den = den.unsigned_abs() as f64;
        let t_min = 2.0 * PI / (60.0 * den * den * self.form.level() as f64);
        let mut hi = t_top;
        let mut total = Complex64::new(0.0, 0.0);
        let mut err: Option<Error> = None;
        while hi > t_min {
            let lo = hi / 2.0;
            let f_re = |t: f64| match self.eval(Complex64::new(r, t)) {
                Ok(v) => v.re,
                Err(_) => f64::NAN,
            };
            let f_im = |t: f64| match self.eval(Complex64::new(r, t)) {
                Ok(v) => v.im,
                Err(_) => f64::NAN,
            };
            let re = adaptive_gauss_legendre(&f_re, lo, hi, tol, 30)?;
            let im = adaptive_gauss_legendre(&f_im, lo, hi, tol, 30)?;
            if !re.is_finite() || !im.is_finite() {
                err = Some(Error::NoConvergence {
                    what: "period quadrature",
                    detail: format!("integrand failed on [{lo}, {hi}] above cusp {r}"),
                });
                break;
            }
            total += Complex64::new(re, im);
            hi = lo;
        }
        if let Some(e) = err {
            return Err(e);
        }
        Ok(head + I * total)
    }
}

/// `ξ_f(x) = −i ∫_{g_x·0}^{g_x·∞} f(z) dz` by quadrature along vertical paths.
pub fn period_integral_oracle(form: &ModularFormData, x: SymbolIndex, tol: f64, ctl: &SeriesControl) -> Result<Complex64> {
    let ev = FormEvaluator::new(form, ctl)?;
    period_with(&ev, x, tol)
}

fn period_with(ev: &FormEvaluator, x: SymbolIndex, tol: f64) -> Result<Complex64> {
    if x.level != ev.form.level() as i64 {
        return invalid("symbol level differs from the form level");
    }
    let g = x.lift();
    let to_inf = |num: i64, den: i64| -> Result<Complex64> {
        if den == 0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            ev.integral_to_infinity(num, den, tol)
        }
    };
    // ∫_{b/d}^{a/c} = ∫_{b/d}^{i∞} − ∫_{a/c}^{i∞}
    let integral = to_inf(g.b, g.d)? - to_inf(g.a, g.c)?;
    Ok(-I * integral)
}

/// `ξ_f` on every class of `P¹(F_p)` by the period oracle, in parallel.
pub fn xi_table_oracle(form: &ModularFormData, tol: f64, ctl: &SeriesControl) -> Result<XiTable> {
    let p = form.level() as i64;
    let ev = FormEvaluator::new(form, ctl)?;
    let reps: Vec<SymbolIndex> = (0..=p)
        .map(|k| if k == p { SymbolIndex { level: p, u: 1, v: 0 } } else { SymbolIndex { level: p, u: k, v: 1 } })
        .collect();
    let vals = crate::par::map_slice(&reps, |x| period_with(&ev, *x, tol));
    Ok(XiTable {
        level: p,
        values: vals.into_iter().collect::<Result<Vec<_>>>()?,
    })
}

/// Petersson product from two `ξ` tables at prime level `N`:
/// `(i/(12(N²−1))) Σ_{(u,v)} ξ₁(u, v)·conj ξ₂(v, −u−v) − ξ₁(v, −u−v)·conj ξ₂(u, v)`.
/// Normalised as `[SL₂(Z) : Γ]⁻¹ ∫_{Γ\H} f₁ conj f₂ dx dy`, so `⟨f, f⟩ > 0`.
pub fn petersson(t1: &XiTable, t2: &XiTable) -> Result<Complex64> {
    if t1.level != t2.level {
        return invalid("tables must share a level");
    }
    let n = t1.level;
    let mut sum = Complex64::new(0.0, 0.0);
    for u in 0..n {
        for v in 0..n {
            if u == 0 && v == 0 {
                continue;
            }
            let a1 = t1.value(v, -u - v)?;
            let b2 = t2.value(u, v)?;
            let a2 = t1.value(u, v)?;
            let b1 = t2.value(v, -u - v)?;
            sum += a2 * b1.conj() - a1 * b2.conj();
        }
    }
    let nf = n as f64;
    Ok(I / (12.0 * (nf * nf - 1.0)) * sum)
}

/// `⟨f, f⟩` by direct quadrature over `Γ₀(p)\H`, for a newform of prime level with
/// trivial character. The domain is the standard fundamental domain `F` together with
/// its images under `S·T^j`, using `|f|S(z)| = |f(z/p)|/p`. The integrand is summed
/// over the `p + 1` cosets at each node of a product Gauss–Legendre rule with `nodes`
/// points per panel; heights run up to `4p` so the width-`p` cusp is fully covered.
pub fn petersson_norm_quadrature(form: &ModularFormData, nodes: usize, ctl: &SeriesControl) -> Result<f64> {
    let p = form.level();
    if !is_prime(p) {
        return invalid("direct Petersson quadrature needs a prime level");
    }
    if nodes < 8 {
        return invalid("need at least 8 nodes per panel");
    }
    let pf = p as f64;
    let gl = crate::specialfns::GaussLegendre::new(nodes);
    let xs = gl.scaled(-0.5, 0.5);
    let top = 4.0 * pf;
    let per_x = crate::par::map_slice(&xs, |&(x, wx)| -> Result<f64> {
        let y0 = (1.0 - x * x).sqrt();
        let mut edges = vec![y0, 1.0, 1.5, 2.2, 3.0];
        while *edges.last().unwrap() < top {
            let next = (edges.last().unwrap() * 1.6).min(top);
            edges.push(next);
        }
        let mut acc = 0.0;
        for pair in edges.windows(2) {
            for (y, wy) in gl.scaled(pair[0], pair[1]) {
                let z = Complex64::new(x, y);
                let mut s = eval_form(form, z, ctl)?.norm_sqr();
                for j in 0..p {
                    s += eval_form(form, (z + j as f64) / pf, ctl)?.norm_sqr() / (pf * pf);
                }
                acc += wy * s;
            }
        }
        Ok(wx * acc)
    });
    let mut total = 0.0;
    for v in per_x {
        total += v?;
    }
    Ok(total / (pf + 1.0))
}

/// All nontrivial characters modulo a prime, for callers building their own tables.
pub fn nontrivial_characters(p: u64) -> Result<Vec<crate::characters::DirichletCharacter>> {
    Ok(enumerate_characters(p)?.into_iter().filter(|c| !c.is_trivial()).collect())
}

/// `Λ(f, 1)` convenience for the special classes.
pub fn lambda_at_one(form: &ModularFormData, ctl: &SeriesControl) -> Result<Complex64> {
    lambda_value(form, Complex64::new(1.0, 0.0), ctl)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_and_nullspace() {
        let rows = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)], vec![q(0), q(1), q(1)]];
        let (r, p) = rref(rows.clone(), 3);
        assert_eq!(p, vec![0, 1]);
        assert_eq!(r.len(), 2);
        let ns = nullspace(rows, 3);
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], vec![q(-1), q(-1), q(1)]);
    }

    #[test]
    fn charpoly_of_small_matrix() {
        let a = vec![vec![q(2), q(1)], vec![q(0), q(3)]];
        assert_eq!(characteristic_polynomial(&a), vec![q(6), q(-5), q(1)]);
    }

    #[test]
    fn genus_values() {
        assert_eq!(genus_x1(5).unwrap(), 0);
        assert_eq!(genus_x1(11).unwrap(), 1);
        assert_eq!(genus_x1(13).unwrap(), 2);
        assert_eq!(genus_x1(23).unwrap(), 12);
    }
}
