//! Linear slices of quasi-Fuchsian once-punctured-torus groups: the
//! numerical core.
//!
//! A point of the slice is a pair `(λ, τ)` of complex Fenchel-Nielsen
//! coordinates; the group it describes is generated by two Möbius
//! transformations whose commutator is parabolic.  This crate provides
//!
//! - [`mobius`]: SL(2,ℂ) matrices, isometry classification, complex length;
//! - [`farey`]: rational slopes, Farey triangles, Stern-Brocot navigation
//!   and the special words representing simple closed curves;
//! - [`repr`]: the Fenchel-Nielsen parametrization of the character
//!   variety and the explicit matrix model;
//! - [`traces`]: trace functions of slopes as Laurent polynomials in
//!   `exp(τ/2)`, built by Farey recursion, plus a real-locus bisection;
//! - [`bq`]: the Bowditch-condition search over the Markov-triple tree
//!   that classifies a point as quasi-Fuchsian or not.
//!
//! Everything here is pure computation over values; IO, grids and the CLI
//! live in the companion `qfslice` crate.  The crate is `no_std` (with
//! `alloc`) so the solver can be embedded anywhere.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bq;
pub mod farey;
pub mod mobius;
pub mod repr;
pub mod traces;

use core::fmt;

pub use num_complex::Complex64;

/// Errors shared by the core operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Error {
    /// `exp(λ/2)` is too close to `{±1, ±i}` (equivalently `tanh(λ/2)` is
    /// zero or infinite), so the matrix model and the trace recursion
    /// degenerate.
    DegenerateLength,
    /// The imaginary part of the trace has equal signs at both ends of the
    /// bisection interval; the caller's `|Re τ|` is too small.
    NoSignChange,
    /// Bisection exhausted its iteration budget without meeting the
    /// tolerance.
    NoConvergence,
    /// Slope numerator or denominator left the supported `|·| ≤ 2^60`
    /// range.
    SlopeOverflow,
    /// `p = q = 0` does not name a slope.
    ZeroSlope,
    /// The vertices are not pairwise Farey neighbors.
    InvalidTriple,
    /// The integer matrix does not have determinant one.
    NotUnimodular,
    /// The operation requires a finite slope (`q ≥ 1`).
    InfiniteSlope,
    /// `j` is outside the admissible band index range `|j| < q/2`.
    BandIndexOutOfRange,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateLength => write!(f, "degenerate length parameter"),
            Error::NoSignChange => write!(f, "no sign change over the bisection interval"),
            Error::NoConvergence => write!(f, "bisection did not converge"),
            Error::SlopeOverflow => write!(f, "slope exceeds the 2^60 integer range"),
            Error::ZeroSlope => write!(f, "0/0 is not a slope"),
            Error::InvalidTriple => write!(f, "vertices are not pairwise Farey neighbors"),
            Error::NotUnimodular => write!(f, "matrix determinant is not 1"),
            Error::InfiniteSlope => write!(f, "operation requires a finite slope"),
            Error::BandIndexOutOfRange => write!(f, "band index j must satisfy |j| < q/2"),
        }
    }
}

impl core::error::Error for Error {}
