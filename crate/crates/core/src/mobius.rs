//! Complex 2×2 matrix arithmetic, isometry classification and complex
//! length.
//!
//! Matrices are kept in SL(2,ℂ): every constructor in this crate produces
//! `|det − 1| ≤ 1e-9 · max(1, ‖entries‖∞)²`.  A matrix acts on the Riemann
//! sphere as `z ↦ (az+b)/(cz+d)` with the usual conventions at `∞`.

use core::ops::Mul;

use num_complex::Complex64;

/// A determinant-one complex 2×2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2C {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

/// A point of the Riemann sphere ℂ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl Mat2C {
    pub const IDENTITY: Mat2C = Mat2C {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2C { a, b, c, d }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Inverse in SL(2,ℂ), i.e. the adjugate.
    pub fn inverse(&self) -> Self {
        Mat2C::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Sup norm over the four entries.
    pub fn max_norm(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    /// Möbius action on ℂ ∪ {∞}; poles map to `∞` exactly.
    pub fn apply(&self, z: SpherePoint) -> SpherePoint {
        match z {
            SpherePoint::Infinity => {
                if self.c.norm_sqr() == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a / self.c)
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm_sqr() == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;

    fn mul(self, rhs: Mat2C) -> Mat2C {
        compose(&self, &rhs)
    }
}

/// Matrix product `AB`.
pub fn compose(a: &Mat2C, b: &Mat2C) -> Mat2C {
    Mat2C::new(
        a.a * b.a + a.b * b.c,
        a.a * b.b + a.b * b.d,
        a.c * b.a + a.d * b.c,
        a.c * b.b + a.d * b.d,
    )
}

/// Möbius action as a free function; see [`Mat2C::apply`].
pub fn apply(m: &Mat2C, z: SpherePoint) -> SpherePoint {
    m.apply(z)
}

/// Isometry type of a Möbius transformation, read off its trace.
///
/// `Identity` is never produced from a trace alone; callers must
/// distinguish `±I` separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsomClass {
    Identity,
    Parabolic,
    Elliptic,
    Hyperbolic,
    Loxodromic,
}

/// Default classification tolerance, `1e-9 · max(1, |t|)`.
pub fn default_classify_eps(t: Complex64) -> f64 {
    1e-9 * t.norm().max(1.0)
}

/// Classify by trace: elliptic for near-real `|Re t| < 2 − eps`, parabolic
/// for near-real `|Re t| ≈ 2`, hyperbolic for near-real `|Re t| > 2 + eps`,
/// loxodromic otherwise.
pub fn classify(t: Complex64, eps: f64) -> IsomClass {
    if libm::fabs(t.im) <= eps {
        let r = libm::fabs(t.re);
        if libm::fabs(r - 2.0) <= eps {
            IsomClass::Parabolic
        } else if r < 2.0 - eps {
            IsomClass::Elliptic
        } else {
            IsomClass::Hyperbolic
        }
    } else {
        IsomClass::Loxodromic
    }
}

/// A complex translation length, normalized to `Re ≥ 0`, `Im ∈ (−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexLength {
    value: Complex64,
}

impl ComplexLength {
    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }
}

/// Complex length `λ` with `2cosh(λ/2) = ±t` for one of the two sign
/// lifts, normalized to `Re λ ≥ 0` and `Im λ ∈ (−π, π]`, ties broken
/// toward `Im ≥ 0`.
pub fn complex_length_from_trace(t: Complex64) -> ComplexLength {
    let s = t / 2.0;
    // e^{λ/2} is a root of ζ² − 2sζ + 1; the two roots are inverses, so
    // picking the one with |ζ| ≥ 1 enforces Re λ ≥ 0.
    let disc = (s * s - 1.0).sqrt();
    let z1 = s + disc;
    let z2 = s - disc;
    let zeta = if z1.norm_sqr() >= z2.norm_sqr() { z1 } else { z2 };

    let mut re = 2.0 * libm::log(zeta.norm());
    if re < 0.0 {
        // Only reachable through rounding when |ζ| ≈ 1.
        re = 0.0;
    }
    let mut im = 2.0 * zeta.arg(); // ∈ (−2π, 2π]
    if im > core::f64::consts::PI {
        im -= 2.0 * core::f64::consts::PI;
    } else if im <= -core::f64::consts::PI {
        im += 2.0 * core::f64::consts::PI;
    }
    // On the elliptic axis both sign lifts are admissible; keep Im ≥ 0.
    if re == 0.0 && im < 0.0 {
        im = -im;
    }
    ComplexLength {
        value: Complex64::new(re, im),
    }
}
