//! Numerical verification of explicit formulas relating `L(E,2)` to elliptic
//! dilogarithms, geodesic integrals of real-analytic Eisenstein series and
//! Mahler measures.
//!
//! The crate is organised bottom-up:
//!
//! * [`specialfns`]: dilogarithms, incomplete gamma, Dedekind eta, Siegel theta,
//!   periodic Bernoulli polynomial and Gauss–Legendre quadrature.
//! * [`characters`]: Dirichlet characters, Gauss sums, finite Fourier transform
//!   and `L(χ,2)`.
//! * [`eisenstein`]: the series `ζ*_{a,b}`, `E*_x`, `E*_f`, the one-form
//!   `η(l,m)` and its geodesic integrals.
//! * [`elliptic`]: curve models, point counts, period lattices, torsion
//!   coordinates and the elliptic dilogarithm.
//! * [`lseries`]: completed L-values of weight-2 forms, twists, root numbers,
//!   the Rankin-type coefficient identity and the `L(f⊗f,s)` residue.
//! * [`modsym`]: Manin symbols, cusps, homology dimensions, `T₂`, diamond
//!   operators, period tables `ξ_f` and the Petersson product.
//! * [`munits`]: divisors of modular units supported on cusps.
//! * [`mahler`]: logarithmic Mahler measure of two-variable polynomials.
//! * [`verify`]: named checks producing serialisable [`verify::CheckReport`]s.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.

pub mod characters;
pub mod eisenstein;
pub mod elliptic;
pub mod error;
pub mod lseries;
pub mod mahler;
pub mod modsym;
pub mod munits;
pub mod par;
pub mod specialfns;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
