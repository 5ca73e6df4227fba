//! Dirichlet characters, Gauss sums, the finite Fourier transform on `Z/NZ`
//! and `L(χ, 2)` through generalized Bernoulli numbers.
//!
//! A character is stored as a table of exponents `e(a)` with
//! `χ(a) = exp(2πi·e(a)/M)`, `M` the exponent of `(Z/NZ)*`, together with a
//! cached complex table. Equality and grouping use the exponents only.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::specialfns::periodic_bernoulli2_frac;

/// Structure of `(Z/NZ)*`: CRT generators, their orders and discrete logs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroup {
    modulus: u64,
    gens: Vec<(u64, u64)>,
    exponent: u64,
    dlog: Vec<Option<Vec<u64>>>,
}

/// Prime factorisation by trial division, primes in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Primality by trial division.
pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

/// `base^exp mod m`.
pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u128;
    let mut b = (base % m) as u128;
    let m128 = m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    result as u64
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let g = a.rem_euclid(m).extended_gcd(&m);
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m))
}

fn multiplicative_order(a: u64, m: u64) -> u64 {
    let mut x = a % m;
    let mut k = 1;
    while x != 1 % m {
        x = x * a % m;
        k += 1;
    }
    k
}

/// Smallest generator of the cyclic group `(Z/p^k Z)*`, `p` odd.
fn primitive_root_prime_power(p: u64, k: u32) -> u64 {
    let pk = p.pow(k);
    let phi = pk / p * (p - 1);
    (2..pk)
        .find(|&g| g % p != 0 && multiplicative_order(g, pk) == phi)
        .unwrap_or(1)
}

impl UnitGroup {
    /// Builds the generator data for `(Z/NZ)*`.
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return invalid("modulus must be at least 1");
        }
        let n = modulus;
        let mut local: Vec<(u64, u64, u64)> = Vec::new(); // (generator mod p^k, order, p^k)
        for (p, k) in factorize(n) {
            let pk = p.pow(k);
            if p == 2 {
                if k >= 2 {
                    local.push((pk - 1, 2, pk));
                }
                if k >= 3 {
                    local.push((5, 1 << (k - 2), pk));
                }
            } else {
                local.push((primitive_root_prime_power(p, k), pk / p * (p - 1), pk));
            }
        }
        let mut gens = Vec::with_capacity(local.len());
        for &(g, order, pk) in &local {
            // CRT lift: ≡ g mod p^k and ≡ 1 modulo the complementary part.
            let rest = n / pk;
            let lifted = if rest == 1 {
                g % n
            } else {
                let inv = inv_mod(rest as i64, pk as i64).expect("coprime CRT parts") as u64;
                let inv2 = inv_mod(pk as i64, rest as i64).expect("coprime CRT parts") as u64;
                ((g as u128 * rest as u128 * inv as u128 + pk as u128 * inv2 as u128) % n as u128) as u64
            };
            gens.push((lifted, order));
        }
        let exponent = gens.iter().fold(1u64, |acc, &(_, o)| acc.lcm(&o));
        let mut dlog: Vec<Option<Vec<u64>>> = vec![None; n as usize];
        let mut idx = vec![0u64; gens.len()];
        loop {
            let mut a = 1 % n;
            for (j, &(g, _)) in gens.iter().enumerate() {
                a = ((a as u128 * pow_mod(g, idx[j], n) as u128) % n as u128) as u64;
            }
            dlog[a as usize] = Some(idx.clone());
            let mut j = 0;
            loop {
                if j == gens.len() {
                    return Ok(Self {
                        modulus,
                        gens,
                        exponent,
                        dlog,
                    });
                }
                idx[j] += 1;
                if idx[j] < gens[j].1 {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    /// The modulus `N`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Generators with their orders.
    pub fn generators(&self) -> &[(u64, u64)] {
        &self.gens
    }

    /// Exponent of the group (lcm of generator orders).
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Discrete logarithm of a unit with respect to the generators.
    pub fn discrete_log(&self, a: i64) -> Option<&[u64]> {
        let r = a.rem_euclid(self.modulus as i64) as usize;
        self.dlog[r].as_deref()
    }
}

/// A Dirichlet character modulo `N`.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    group: Arc<UnitGroup>,
    gen_exps: Vec<u64>,
    exps: Vec<Option<u64>>,
    values: Vec<Complex64>,
    conductor: u64,
    even: bool,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.gen_exps == other.gen_exps
    }
}

impl Eq for DirichletCharacter {}

fn root_of_unity(num: u64, den: u64) -> Complex64 {
    let r = num % den;
    if r == 0 {
        Complex64::new(1.0, 0.0)
    } else if 2 * r == den {
        Complex64::new(-1.0, 0.0)
    } else if 4 * r == den {
        Complex64::new(0.0, 1.0)
    } else if 4 * r == 3 * den {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::from_polar(1.0, 2.0 * PI * r as f64 / den as f64)
    }
}

impl DirichletCharacter {
    fn from_gen_exps(group: Arc<UnitGroup>, gen_exps: Vec<u64>) -> Self {
        let n = group.modulus;
        let m = group.exponent;
        let mut exps = vec![None; n as usize];
        let mut values = vec![Complex64::new(0.0, 0.0); n as usize];
        for a in 0..n as usize {
            if let Some(logs) = &group.dlog[a] {
                let mut e = 0u64;
                for (j, &(_, order)) in group.gens.iter().enumerate() {
                    e = (e + gen_exps[j] * (m / order) * logs[j]) % m;
                }
                exps[a] = Some(e);
                values[a] = root_of_unity(e, m);
            }
        }
        let even = exps[(n - 1) as usize].is_none_or(|e| e == 0);
        let mut chi = Self {
            group,
            gen_exps,
            exps,
            values,
            conductor: n,
            even,
        };
        chi.conductor = chi.compute_conductor();
        chi
    }

    fn compute_conductor(&self) -> u64 {
        let n = self.group.modulus;
        let mut divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
        divisors.sort_unstable();
        for d in divisors {
            let factors = (0..n).all(|a| {
                if a % d != 1 % d {
                    return true;
                }
                match self.exps[a as usize] {
                    Some(e) => e == 0,
                    None => true,
                }
            });
            if factors {
                return d;
            }
        }
        n
    }

    /// Trivial (principal) character modulo `n`.
    pub fn trivial(n: u64) -> Result<Self> {
        let group = Arc::new(UnitGroup::new(n)?);
        let k = group.gens.len();
        Ok(Self::from_gen_exps(group, vec![0; k]))
    }

    /// The modulus `N`.
    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    /// Underlying unit-group data.
    pub fn group(&self) -> &UnitGroup {
        &self.group
    }

    /// Exponents `k_j` with `χ(g_j) = exp(2πi k_j / ord g_j)`.
    pub fn generator_exponents(&self) -> &[u64] {
        &self.gen_exps
    }

    /// `χ(a)` for any integer `a` (zero when `gcd(a, N) > 1`).
    pub fn value(&self, a: i64) -> Complex64 {
        self.values[a.rem_euclid(self.group.modulus as i64) as usize]
    }

    /// Exponent `e` with `χ(a) = exp(2πi e / M)`, `M = ` [`Self::exponent_base`].
    pub fn exponent(&self, a: i64) -> Option<u64> {
        self.exps[a.rem_euclid(self.group.modulus as i64) as usize]
    }

    /// The denominator `M` used by [`Self::exponent`].
    pub fn exponent_base(&self) -> u64 {
        self.group.exponent
    }

    /// Full value table indexed by residues `0..N`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Conductor (smallest modulus through which the character factors).
    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// True when `χ(−1) = 1`.
    pub fn is_even(&self) -> bool {
        self.even
    }

    /// `χ(−1)` as `±1`.
    pub fn parity(&self) -> i32 {
        if self.even {
            1
        } else {
            -1
        }
    }

    /// True for the principal character.
    pub fn is_trivial(&self) -> bool {
        self.gen_exps.iter().all(|&k| k == 0)
    }

    /// True when the conductor equals the modulus.
    pub fn is_primitive(&self) -> bool {
        self.conductor == self.group.modulus
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        self.group
            .gens
            .iter()
            .zip(&self.gen_exps)
            .fold(1u64, |acc, (&(_, o), &k)| acc.lcm(&(o / o.gcd(&k))))
    }

    /// Complex conjugate character `χ̄`.
    pub fn conj(&self) -> Self {
        let gen_exps = self
            .group
            .gens
            .iter()
            .zip(&self.gen_exps)
            .map(|(&(_, o), &k)| (o - k) % o)
            .collect();
        Self::from_gen_exps(self.group.clone(), gen_exps)
    }

    /// Pointwise product of two characters with the same modulus.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.modulus() != other.modulus() {
            return invalid("characters must share a modulus");
        }
        let gen_exps = self
            .group
            .gens
            .iter()
            .zip(self.gen_exps.iter().zip(&other.gen_exps))
            .map(|(&(_, o), (&a, &b))| (a + b) % o)
            .collect();
        Ok(Self::from_gen_exps(self.group.clone(), gen_exps))
    }

    /// Canonical label `N:g=a,zetaM^k[,...]`, one entry per generator.
    pub fn label(&self) -> String {
        let mut parts = vec![format!("{}", self.modulus())];
        let mut entries = Vec::new();
        for (&(g, o), &k) in self.group.gens.iter().zip(&self.gen_exps) {
            let d = o.gcd(&k);
            let (num, den) = if k == 0 { (0, 1) } else { (k / d, o / d) };
            entries.push(format!("g={g},zeta{den}^{num}"));
        }
        if !entries.is_empty() {
            parts.push(entries.join(","));
        }
        parts.join(":")
    }

    /// Parses a label such as `11:g=2,zeta5^1`.
    ///
    /// Each `g=a,zetaM^k` pair prescribes `χ(a) = exp(2πi k/M)`; the
    /// prescriptions must determine exactly one character modulo `N`.
    pub fn from_label(label: &str) -> Result<Self> {
        let label = label.trim();
        let (n_str, rest) = match label.split_once(':') {
            Some((a, b)) => (a, b),
            None => (label, ""),
        };
        let n: u64 = n_str
            .trim()
            .parse()
            .map_err(|_| crate::Error::InvalidInput(format!("bad modulus in character label {label:?}")))?;
        if n == 0 {
            return invalid("character modulus must be positive");
        }
        let tokens: Vec<&str> = rest.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
        if tokens.len() % 2 != 0 {
            return invalid(format!("character label {label:?} needs g=..,zetaM^k pairs"));
        }
        let mut constraints = Vec::new();
        for pair in tokens.chunks(2) {
            let g: i64 = pair[0]
                .strip_prefix("g=")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| crate::Error::InvalidInput(format!("expected g=<int>, got {:?}", pair[0])))?;
            let (m, k) = pair[1]
                .strip_prefix("zeta")
                .and_then(|s| s.split_once('^'))
                .and_then(|(m, k)| Some((m.parse::<u64>().ok()?, k.parse::<i64>().ok()?)))
                .ok_or_else(|| crate::Error::InvalidInput(format!("expected zetaM^k, got {:?}", pair[1])))?;
            if m == 0 {
                return invalid("root-of-unity order must be positive");
            }
            constraints.push((g, m, k.rem_euclid(m as i64) as u64));
        }
        let matches: Vec<DirichletCharacter> = enumerate_characters(n)?
            .into_iter()
            .filter(|chi| {
                let big = chi.exponent_base();
                constraints.iter().all(|&(g, m, k)| match chi.exponent(g) {
                    // e/big ≡ k/m (mod 1)
                    Some(e) => (e as u128 * m as u128) % (big as u128 * m as u128)
                        == (k as u128 * big as u128) % (big as u128 * m as u128),
                    None => false,
                })
            })
            .collect();
        match matches.len() {
            1 => Ok(matches.into_iter().next().expect("one match")),
            0 => invalid(format!("no character modulo {n} matches {label:?}")),
            c => invalid(format!("label {label:?} matches {c} characters; add generator values")),
        }
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// All `φ(N)` characters modulo `N`, trivial character first.
pub fn enumerate_characters(n: u64) -> Result<Vec<DirichletCharacter>> {
    let group = Arc::new(UnitGroup::new(n)?);
    let orders: Vec<u64> = group.gens.iter().map(|&(_, o)| o).collect();
    let mut out = Vec::new();
    let mut idx = vec![0u64; orders.len()];
    loop {
        out.push(DirichletCharacter::from_gen_exps(group.clone(), idx.clone()));
        let mut j = 0;
        loop {
            if j == orders.len() {
                return Ok(out);
            }
            idx[j] += 1;
            if idx[j] < orders[j] {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Even nontrivial characters modulo `N`.
pub fn even_nontrivial_characters(n: u64) -> Result<Vec<DirichletCharacter>> {
    Ok(enumerate_characters(n)?
        .into_iter()
        .filter(|c| c.is_even() && !c.is_trivial())
        .collect())
}

/// Odd characters modulo `N`.
pub fn odd_characters(n: u64) -> Result<Vec<DirichletCharacter>> {
    Ok(enumerate_characters(n)?.into_iter().filter(|c| !c.is_even()).collect())
}

/// Gauss sum `τ(χ) = Σ_v χ(v)·e^{2πiv/N}`.
pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    let n = chi.modulus();
    (0..n)
        .map(|v| chi.value(v as i64) * root_of_unity(v, n))
        .sum()
}

/// Complex-valued function on `Z/NZ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMap {
    modulus: u64,
    values: Vec<Complex64>,
}

impl FiniteMap {
    /// Builds a map from its table of values at `0..N`.
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("a finite map needs at least one value");
        }
        Ok(Self {
            modulus: values.len() as u64,
            values,
        })
    }

    /// Map with real values.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Indicator of a single residue.
    pub fn delta(n: u64, at: i64) -> Result<Self> {
        let mut v = vec![Complex64::new(0.0, 0.0); n as usize];
        if n == 0 {
            return invalid("modulus must be positive");
        }
        v[at.rem_euclid(n as i64) as usize] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    /// The character's value table viewed as a map.
    pub fn from_character(chi: &DirichletCharacter) -> Self {
        Self {
            modulus: chi.modulus(),
            values: chi.values().to_vec(),
        }
    }

    /// The modulus `N`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Value table.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `f(a)` for any integer `a`.
    pub fn at(&self, a: i64) -> Complex64 {
        self.values[a.rem_euclid(self.modulus as i64) as usize]
    }

    /// `Σ_v f(v)`.
    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// `v ↦ c·f(v) + d·g(v)`.
    pub fn linear_combination(&self, c: Complex64, other: &Self, d: Complex64) -> Result<Self> {
        if self.modulus != other.modulus {
            return invalid("maps must share a modulus");
        }
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| c * a + d * b)
                .collect(),
        )
    }

    /// `v ↦ f(−v)`.
    pub fn reflect(&self) -> Self {
        let n = self.modulus as i64;
        Self {
            modulus: self.modulus,
            values: (0..n).map(|v| self.at(-v)).collect(),
        }
    }

    /// Fourier transform `f̂(b) = Σ_v f(v)·e^{−2πibv/N}`.
    pub fn fourier_transform(&self) -> Self {
        let n = self.modulus;
        let values = (0..n)
            .map(|b| {
                (0..n)
                    .map(|v| self.values[v as usize] * root_of_unity((n - (b * v) % n) % n, n))
                    .sum()
            })
            .collect();
        Self {
            modulus: n,
            values,
        }
    }
}

/// Free-function form of [`FiniteMap::fourier_transform`].
pub fn fourier_transform(f: &FiniteMap) -> FiniteMap {
    f.fourier_transform()
}

/// Generalized Bernoulli number `B_{2,χ} = N·Σ_a χ(a)·B̄₂(a/N)`.
pub fn generalized_bernoulli2(chi: &DirichletCharacter) -> Complex64 {
    let n = chi.modulus() as i64;
    let s: Complex64 = (0..n)
        .map(|a| chi.value(a) * periodic_bernoulli2_frac(a, n))
        .sum();
    s * n as f64
}

fn check_even_primitive(chi: &DirichletCharacter) -> Result<()> {
    if chi.is_trivial() {
        return invalid("L(χ,2) closed form needs a nontrivial character");
    }
    if !chi.is_even() {
        return invalid("L(χ,2) closed form needs an even character");
    }
    if !chi.is_primitive() {
        return invalid(format!(
            "L(χ,2) closed form needs a primitive character (conductor {} < modulus {})",
            chi.conductor(),
            chi.modulus()
        ));
    }
    Ok(())
}

/// `L(χ,2)/π² = B_{2,χ̄} / (N·τ(χ̄))` for even nontrivial primitive `χ`.
pub fn l_chi_2_over_pi2(chi: &DirichletCharacter) -> Result<Complex64> {
    check_even_primitive(chi)?;
    let cb = chi.conj();
    Ok(generalized_bernoulli2(&cb) / (chi.modulus() as f64 * gauss_sum(&cb)))
}

/// `L(χ, 2)` for even nontrivial primitive `χ`, by the Bernoulli closed form.
pub fn l_chi_2(chi: &DirichletCharacter) -> Result<Complex64> {
    Ok(l_chi_2_over_pi2(chi)? * (PI * PI))
}
