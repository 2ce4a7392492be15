//! The complex Fenchel-Nielsen parametrization, the explicit matrix model
//! and the Markov character variety.
//!
//! A point `(λ, τ)` maps to the trace triple
//!
//! ```text
//! ψ_FN(λ, τ) = (2cosh(λ/2), 2cosh(τ/2)/tanh(λ/2), 2cosh((τ+λ)/2)/tanh(λ/2))
//! ```
//!
//! which satisfies the Markov identity `x² + y² + z² − xyz = 0`.  The
//! matrix pair realizes one SL(2,ℂ) lift of this character; the residual
//! sign freedom is the `H¹(S; ℤ/2)` action on `(x, y, z)`.

use num_complex::Complex64;

use crate::farey::{Letter, Word};
use crate::mobius::{compose, Mat2C};
use crate::Error;

/// A point of the complex Fenchel-Nielsen domain.
///
/// The natural domain is `Re λ > 0`, `|Im λ| < π`, `Im τ ∈ [−π, π)`; the
/// maps below extend holomorphically beyond it, so the domain test is a
/// separate validator rather than a constructor restriction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FNPoint {
    pub lambda: Complex64,
    pub tau: Complex64,
}

impl FNPoint {
    pub fn new(lambda: Complex64, tau: Complex64) -> FNPoint {
        FNPoint { lambda, tau }
    }

    /// A real slice point `(l, τ)`.
    pub fn real(l: f64, tau: Complex64) -> FNPoint {
        FNPoint {
            lambda: Complex64::new(l, 0.0),
            tau,
        }
    }

    /// Whether the point lies in the injectivity domain with `b₀ = −π`.
    pub fn is_in_domain(&self) -> bool {
        self.lambda.re > 0.0
            && self.lambda.im > -core::f64::consts::PI
            && self.lambda.im < core::f64::consts::PI
            && self.tau.im >= -core::f64::consts::PI
            && self.tau.im < core::f64::consts::PI
    }
}

/// A point `(x, y, z)` of the SL(2,ℂ) character variety.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharPoint {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

/// `x² + y² + z² − xyz`; zero on the Markov variety.
pub fn markov_residual(c: &CharPoint) -> Complex64 {
    c.x * c.x + c.y * c.y + c.z * c.z - c.x * c.y * c.z
}

/// The Fenchel-Nielsen parametrization of the character variety.
pub fn psi_fn(pt: &FNPoint) -> CharPoint {
    let half_l = pt.lambda / 2.0;
    let th = half_l.tanh();
    CharPoint {
        x: 2.0 * half_l.cosh(),
        y: 2.0 * (pt.tau / 2.0).cosh() / th,
        z: 2.0 * ((pt.tau + pt.lambda) / 2.0).cosh() / th,
    }
}

/// One generator class of the `H¹(S; ℤ/2)` sign action on characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    /// Identity.
    PlusPlus,
    /// `(x, y, z) ↦ (−x, y, −z)`.
    MinusPlus,
    /// `(x, y, z) ↦ (x, −y, −z)`.
    PlusMinus,
    /// `(x, y, z) ↦ (−x, −y, z)`, the product of the two generators.
    MinusMinus,
}

/// Apply a sign class to a character point.
pub fn h1_action(sign: SignClass, c: &CharPoint) -> CharPoint {
    let (sx, sy): (f64, f64) = match sign {
        SignClass::PlusPlus => (1.0, 1.0),
        SignClass::MinusPlus => (-1.0, 1.0),
        SignClass::PlusMinus => (1.0, -1.0),
        SignClass::MinusMinus => (-1.0, -1.0),
    };
    CharPoint {
        x: sx * c.x,
        y: sy * c.y,
        z: sx * sy * c.z,
    }
}

/// The images of the generators `a`, `b` in SL(2,ℂ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepPair {
    pub a: Mat2C,
    pub b: Mat2C,
}

/// Degeneracy guard shared with the trace recursion: `e^{λ/2}` must stay
/// away from `{±1, ±i}`.
pub(crate) fn check_nondegenerate(lambda: Complex64) -> Result<Complex64, Error> {
    let e1 = (lambda / 2.0).exp();
    if !e1.is_finite() {
        return Err(Error::DegenerateLength);
    }
    let i = Complex64::new(0.0, 1.0);
    for bad in [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        i,
        -i,
    ] {
        if (e1 - bad).norm() <= 1e-12 {
            return Err(Error::DegenerateLength);
        }
    }
    Ok(e1)
}

/// The explicit matrix pair for `(λ, τ)`, with `e₁ = e^{λ/2}`,
/// `t₁ = e^{τ}` and the square root of `t₁` fixed as `e^{τ/2}` (this is
/// the principal branch for `Im τ ∈ (−π, π]` and keeps the lift continuous
/// in `τ`).  With this choice `tr A = x`, `tr B = y`, `tr AB = z` exactly
/// as in `ψ_FN`.
pub fn matrices(pt: &FNPoint) -> Result<RepPair, Error> {
    let e1 = check_nondegenerate(pt.lambda)?;
    let e1_inv = 1.0 / e1;
    let a = Mat2C::new(
        e1,
        2.0 * e1_inv,
        Complex64::new(0.0, 0.0),
        e1_inv,
    );

    let sqrt_t1 = (pt.tau / 2.0).exp();
    let t1 = sqrt_t1 * sqrt_t1;
    let e1_sq = e1 * e1;
    let den = sqrt_t1 * (e1_sq - 1.0);
    let b = Mat2C::new(
        ((e1_sq + 1.0) * t1 + 2.0) / den,
        -2.0 * (t1 + 1.0) / den,
        (1.0 - e1_sq) / den,
        (e1_sq - 1.0) / den,
    );
    Ok(RepPair { a, b })
}

/// Evaluate a freely reduced word as a matrix product in the model.
pub fn evaluate_word(w: &Word, rep: &RepPair) -> Mat2C {
    let a_inv = rep.a.inverse();
    let b_inv = rep.b.inverse();
    let mut m = Mat2C::IDENTITY;
    for l in w.letters() {
        let g = match l {
            Letter::A => &rep.a,
            Letter::AInv => &a_inv,
            Letter::B => &rep.b,
            Letter::BInv => &b_inv,
        };
        m = compose(&m, g);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::{special_word, Slope};
    use num_complex::Complex64 as C;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn residual_bound(ch: &CharPoint) -> f64 {
        let m = ch.x.norm().max(ch.y.norm()).max(ch.z.norm());
        1e-9 * (1.0 + m).powi(3)
    }

    #[test]
    fn psi_fn_at_2_0() {
        let pt = FNPoint::real(2.0, c(0.0, 0.0));
        let ch = psi_fn(&pt);
        let t1 = 1.0f64;
        assert!((ch.x - c(2.0 * t1.cosh(), 0.0)).norm() < 1e-12);
        assert!((ch.y - c(2.0 / t1.tanh(), 0.0)).norm() < 1e-12);
        assert!((ch.z - c(2.0 * t1.cosh() / t1.tanh(), 0.0)).norm() < 1e-12);
        assert!(markov_residual(&ch).norm() <= residual_bound(&ch));
    }

    #[test]
    fn fuchsian_locus_is_real() {
        let pt = FNPoint::real(1.3, c(0.7, 0.0));
        let ch = psi_fn(&pt);
        assert!(ch.x.im.abs() < 1e-14);
        assert!(ch.y.im.abs() < 1e-14);
        assert!(ch.z.im.abs() < 1e-14);
    }

    #[test]
    fn markov_residual_literals() {
        let r = markov_residual(&CharPoint {
            x: c(3.0, 0.0),
            y: c(3.0, 0.0),
            z: c(3.0, 0.0),
        });
        assert_eq!(r, c(0.0, 0.0));
        let r = markov_residual(&CharPoint {
            x: c(2.0, 0.0),
            y: c(2.0, 0.0),
            z: c(2.0, 0.0),
        });
        assert_eq!(r, c(4.0, 0.0));
    }

    #[test]
    fn h1_action_table() {
        let ch = CharPoint {
            x: c(1.0, 0.0),
            y: c(2.0, 0.0),
            z: c(3.0, 0.0),
        };
        assert_eq!(h1_action(SignClass::PlusPlus, &ch), ch);
        let m = h1_action(SignClass::MinusPlus, &ch);
        assert_eq!((m.x, m.y, m.z), (c(-1.0, 0.0), c(2.0, 0.0), c(-3.0, 0.0)));
        let m = h1_action(SignClass::PlusMinus, &ch);
        assert_eq!((m.x, m.y, m.z), (c(1.0, 0.0), c(-2.0, 0.0), c(-3.0, 0.0)));
        let m = h1_action(SignClass::MinusMinus, &ch);
        assert_eq!((m.x, m.y, m.z), (c(-1.0, 0.0), c(-2.0, 0.0), c(3.0, 0.0)));
        // Every class preserves the residual exactly.
        for s in [SignClass::MinusPlus, SignClass::PlusMinus, SignClass::MinusMinus] {
            assert_eq!(markov_residual(&h1_action(s, &ch)), markov_residual(&ch));
        }
    }

    #[test]
    fn matrix_traces_match_psi_fn() {
        let pt = FNPoint::new(c(1.3, 0.4), c(0.6, -0.8));
        let rep = matrices(&pt).unwrap();
        let ch = psi_fn(&pt);
        assert!((rep.a.trace() - ch.x).norm() < 1e-12 * (1.0 + ch.x.norm()));
        assert!((rep.b.trace() - ch.y).norm() < 1e-12 * (1.0 + ch.y.norm()));
        let ab = compose(&rep.a, &rep.b);
        assert!((ab.trace() - ch.z).norm() < 1e-12 * (1.0 + ch.z.norm()));
        // Determinants stay 1.
        for m in [rep.a, rep.b, ab] {
            assert!((m.det() - c(1.0, 0.0)).norm() <= 1e-9 * m.max_norm().max(1.0).powi(2));
        }
    }

    #[test]
    fn commutator_is_parabolic() {
        let pt = FNPoint::new(c(2.0, -0.3), c(-0.4, 1.1));
        let rep = matrices(&pt).unwrap();
        let comm = compose(
            &compose(&rep.a, &rep.b),
            &compose(&rep.a.inverse(), &rep.b.inverse()),
        );
        assert!((comm.trace() - c(-2.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn degenerate_lengths_rejected() {
        assert_eq!(matrices(&FNPoint::new(c(0.0, 0.0), c(1.0, 0.0))), Err(Error::DegenerateLength));
        // λ = iπ gives e^{λ/2} = i.
        assert_eq!(
            matrices(&FNPoint::new(c(0.0, core::f64::consts::PI), c(1.0, 0.0))),
            Err(Error::DegenerateLength)
        );
    }

    #[test]
    fn evaluate_word_basics() {
        let pt = FNPoint::new(c(1.1, 0.2), c(0.3, 0.5));
        let rep = matrices(&pt).unwrap();
        assert_eq!(evaluate_word(&Word::empty(), &rep), Mat2C::IDENTITY);
        assert_eq!(evaluate_word(&special_word(&Slope::new(0, 1).unwrap()), &rep), rep.b);
    }

    #[test]
    fn integral_trace_consistency() {
        // tr of the n/1 special word equals 2cosh((τ+nλ)/2)/tanh(λ/2).
        let pt = FNPoint::new(c(1.2, 0.3), c(0.4, 0.1));
        let rep = matrices(&pt).unwrap();
        let th = (pt.lambda / 2.0).tanh();
        for n in -5i64..=5 {
            let w = special_word(&Slope::new(n, 1).unwrap());
            let got = evaluate_word(&w, &rep).trace();
            let want = 2.0 * ((pt.tau + (n as f64) * pt.lambda) / 2.0).cosh() / th;
            assert!(
                (got - want).norm() <= 1e-8 * (1.0 + want.norm()),
                "n = {n}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn shift_by_two_pi_i_flips_signs() {
        let pt = FNPoint::new(c(0.9, 0.2), c(0.5, -0.6));
        let shifted = FNPoint::new(pt.lambda, pt.tau + c(0.0, 2.0 * core::f64::consts::PI));
        let ch = psi_fn(&pt);
        let sh = psi_fn(&shifted);
        assert!((sh.x - ch.x).norm() < 1e-9 * (1.0 + ch.x.norm()));
        assert!((sh.y + ch.y).norm() < 1e-9 * (1.0 + ch.y.norm()));
        assert!((sh.z + ch.z).norm() < 1e-9 * (1.0 + ch.z.norm()));
    }

    proptest! {
        #[test]
        fn residual_vanishes_on_image(
            lre in 0.1f64..4.0, lim in -2.9f64..2.9,
            tre in -6.0f64..6.0, tim in -3.1f64..3.1,
        ) {
            let pt = FNPoint::new(c(lre, lim), c(tre, tim));
            let ch = psi_fn(&pt);
            prop_assert!(markov_residual(&ch).norm() <= residual_bound(&ch));
        }

        #[test]
        fn conjugation_equivariance(
            lre in 0.1f64..3.0, lim in -2.9f64..2.9,
            tre in -4.0f64..4.0, tim in -3.0f64..3.0,
        ) {
            let pt = FNPoint::new(c(lre, lim), c(tre, tim));
            let conj = FNPoint::new(pt.lambda.conj(), pt.tau.conj());
            let ch = psi_fn(&pt);
            let cc = psi_fn(&conj);
            prop_assert!((cc.x - ch.x.conj()).norm() <= 1e-12 * (1.0 + ch.x.norm()));
            prop_assert!((cc.y - ch.y.conj()).norm() <= 1e-12 * (1.0 + ch.y.norm()));
            prop_assert!((cc.z - ch.z.conj()).norm() <= 1e-12 * (1.0 + ch.z.norm()));
        }
    }
}
