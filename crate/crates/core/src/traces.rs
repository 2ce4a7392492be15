//! Trace functions of slopes as Laurent polynomials in `e^{τ/2}`.
//!
//! For a fixed length parameter `λ`, the trace of the slope `p/q` is
//!
//! ```text
//! tr_{p/q}(λ, τ) = Σ_{k=−q..q} c_{p/q,k}(λ) · exp(kτ/2)
//! ```
//!
//! with coefficients supported on `k ≡ q (mod 2)`.  Base cases:
//! `tr_{1/0} = 2cosh(λ/2)` and `tr_{n/1}` has `c_{±1} = e^{±nλ/2}/tanh(λ/2)`.
//! The mediant of Farey neighbors obeys the three-term identity
//! `tr_{(p+r)/(q+s)} = tr_{p/q}·tr_{r/s} − tr_{(p−r)/(q−s)}`, realized here
//! as coefficient convolution minus an aligned difference polynomial; the
//! difference slope is always the vertex discarded on the previous step of
//! the Stern-Brocot walk, so a rolling triple of polynomials suffices.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::farey::{special_word, Slope};
use crate::repr::{check_nondegenerate, evaluate_word, matrices, FNPoint};
use crate::Error;

/// Coefficient magnitude past which a polynomial is marked saturated.
pub const SATURATION_LIMIT: f64 = 1e150;

/// Bisection budget for [`real_locus_b`].
const MAX_BISECTIONS: usize = 80;

/// The Laurent-coefficient form of one trace function at fixed `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoly {
    slope: Slope,
    lambda: Complex64,
    /// `coeffs[i]` is `c_{i−q}`; length `2q + 1`.
    coeffs: Vec<Complex64>,
    saturated: bool,
}

impl TracePoly {
    pub fn slope(&self) -> Slope {
        self.slope
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn q(&self) -> i64 {
        self.slope.q()
    }

    /// Coefficient `c_k`, zero outside `|k| ≤ q`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let q = self.q();
        if k < -q || k > q {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + q) as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// True once some coefficient left the trustworthy magnitude range.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    /// Evaluate at `τ` by Horner passes in `u = e^{τ/2}` and `u⁻¹`.
    pub fn eval(&self, tau: Complex64) -> Complex64 {
        if self.saturated {
            return Complex64::new(f64::INFINITY, f64::INFINITY);
        }
        let q = self.q() as usize;
        let u = (tau / 2.0).exp();
        let u_inv = 1.0 / u;
        // Positive powers, highest first: (((c_q) u + c_{q−1}) u + …) u + 0.
        let mut pos = Complex64::new(0.0, 0.0);
        for k in (1..=q).rev() {
            pos = (pos + self.coeffs[q + k]) * u;
        }
        let mut neg = Complex64::new(0.0, 0.0);
        for k in (1..=q).rev() {
            neg = (neg + self.coeffs[q - k]) * u_inv;
        }
        pos + neg + self.coeffs[q]
    }
}

/// Evaluate a trace polynomial; free-function form of [`TracePoly::eval`].
pub fn eval(tp: &TracePoly, tau: Complex64) -> Complex64 {
    tp.eval(tau)
}

fn constant_poly(lambda: Complex64, value: Complex64) -> TracePoly {
    TracePoly {
        slope: Slope::INFINITY,
        lambda,
        coeffs: vec![value],
        saturated: !value.is_finite() || value.norm() > SATURATION_LIMIT,
    }
}

fn integer_poly(n: i64, lambda: Complex64, inv_tanh: Complex64) -> TracePoly {
    let plus = ((n as f64) * lambda / 2.0).exp() * inv_tanh;
    let minus = (-(n as f64) * lambda / 2.0).exp() * inv_tanh;
    let coeffs = vec![minus, Complex64::new(0.0, 0.0), plus];
    let saturated = !(plus.is_finite() && minus.is_finite())
        || plus.norm() > SATURATION_LIMIT
        || minus.norm() > SATURATION_LIMIT;
    TracePoly {
        slope: Slope::new(n, 1).expect("integer slope"),
        lambda,
        coeffs,
        saturated,
    }
}

/// `lhs·rhs − diff` on Laurent coefficients, aligned on the `k`-lattice.
fn mediant_poly(slope: Slope, lhs: &TracePoly, rhs: &TracePoly, diff: &TracePoly) -> TracePoly {
    let q = lhs.q() + rhs.q();
    debug_assert_eq!(q, slope.q());
    let len = (2 * q + 1) as usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
    for (i, a) in lhs.coeffs.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        for (j, b) in rhs.coeffs.iter().enumerate() {
            coeffs[i + j] += a * b;
        }
    }
    let shift = (q - diff.q()) as usize;
    for (i, d) in diff.coeffs.iter().enumerate() {
        coeffs[i + shift] -= d;
    }
    let mut saturated = lhs.saturated || rhs.saturated || diff.saturated;
    if !saturated {
        for c in &coeffs {
            if !c.is_finite() || c.norm() > SATURATION_LIMIT {
                saturated = true;
                break;
            }
        }
    }
    TracePoly {
        slope,
        lambda: lhs.lambda,
        coeffs,
        saturated,
    }
}

/// Build the trace polynomial of `s` at `λ` by Farey recursion along the
/// Stern-Brocot walk.
pub fn trace_poly(s: &Slope, lambda: Complex64) -> Result<TracePoly, Error> {
    let e1 = check_nondegenerate(lambda)?;
    if s.is_infinity() {
        return Ok(TracePoly {
            slope: *s,
            ..constant_poly(lambda, e1 + 1.0 / e1)
        });
    }
    let th = (lambda / 2.0).tanh();
    if !th.is_finite() || th.norm() < 1e-12 {
        return Err(Error::DegenerateLength);
    }
    let inv_tanh = 1.0 / th;
    if s.q() == 1 {
        return Ok(integer_poly(s.p(), lambda, inv_tanh));
    }

    // Rolling triple (lo, hi, other): `other` is the trace of the vertex
    // the next mediant step discards, starting from 1/0 on the integer
    // bracket.
    let n = s.p().div_euclid(s.q());
    let mut lo = Slope::new(n, 1)?;
    let mut hi = Slope::new(n + 1, 1)?;
    let mut p_lo = integer_poly(n, lambda, inv_tanh);
    let mut p_hi = integer_poly(n + 1, lambda, inv_tanh);
    let mut p_other = constant_poly(lambda, e1 + 1.0 / e1);
    loop {
        let med = lo.mediant(&hi)?;
        let p_med = mediant_poly(med, &p_lo, &p_hi, &p_other);
        if med == *s {
            return Ok(p_med);
        }
        let go_left = {
            // s < med on finite slopes
            (s.p() as i128) * (med.q() as i128) < (med.p() as i128) * (s.q() as i128)
        };
        if go_left {
            p_other = core::mem::replace(&mut p_hi, p_med);
            hi = med;
        } else {
            p_other = core::mem::replace(&mut p_lo, p_med);
            lo = med;
        }
    }
}

/// Trace of the special word of `s` in the matrix model at `pt`: the
/// independent oracle for [`trace_poly`].
pub fn trace_direct(s: &Slope, pt: &FNPoint) -> Result<Complex64, Error> {
    let rep = matrices(pt)?;
    Ok(evaluate_word(&special_word(s), &rep).trace())
}

/// Locate `b` in the band `((2j−1)π/q, (2j+1)π/q)` with
/// `Im tr_{p/q}(l, t + b·i) = 0`, by bisection.
///
/// Requires opposite signs at the band endpoints; for small `|t|` that can
/// legitimately fail, which is reported as [`Error::NoSignChange`].
pub fn real_locus_b(s: &Slope, l: f64, t: f64, j: i64) -> Result<f64, Error> {
    if s.is_infinity() || s.q() < 1 {
        return Err(Error::InfiniteSlope);
    }
    let q = s.q();
    if 2 * j.abs() >= q {
        return Err(Error::BandIndexOutOfRange);
    }
    let poly = trace_poly(s, Complex64::new(l, 0.0))?;
    let pi = core::f64::consts::PI;
    let mut lo = ((2 * j - 1) as f64) * pi / (q as f64);
    let mut hi = ((2 * j + 1) as f64) * pi / (q as f64);
    let im_at = |b: f64| poly.eval(Complex64::new(t, b)).im;
    let f_lo = im_at(lo);
    let f_hi = im_at(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(Error::NoSignChange);
    }
    let lo_positive = f_lo > 0.0;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let val = poly.eval(Complex64::new(t, mid));
        if libm::fabs(val.im) < 1e-10 * (1.0 + val.norm()) {
            return Ok(mid);
        }
        if (val.im > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sl(p: i64, q: i64) -> Slope {
        Slope::new(p, q).unwrap()
    }

    #[test]
    fn infinity_is_constant() {
        let lam = c(1.7, 0.4);
        let tp = trace_poly(&Slope::INFINITY, lam).unwrap();
        assert_eq!(tp.q(), 0);
        let want = 2.0 * (lam / 2.0).cosh();
        assert!((tp.coeff(0) - want).norm() < 1e-12 * want.norm());
        // Independent of τ.
        let v1 = tp.eval(c(0.3, 0.1));
        let v2 = tp.eval(c(-5.0, 2.0));
        assert_eq!(v1, v2);
    }

    #[test]
    fn zero_slope_coefficients() {
        let lam = c(2.0, 0.0);
        let tp = trace_poly(&sl(0, 1), lam).unwrap();
        let want = 1.0 / 1.0f64.tanh();
        assert!((tp.coeff(1) - c(want, 0.0)).norm() < 1e-12);
        assert!((tp.coeff(-1) - c(want, 0.0)).norm() < 1e-12);
        assert_eq!(tp.coeff(0), c(0.0, 0.0));
    }

    #[test]
    fn half_slope_matches_word_oracle() {
        let pt = FNPoint::new(c(1.2, 0.0), c(0.4, 0.1));
        let tp = trace_poly(&sl(1, 2), pt.lambda).unwrap();
        let via_poly = tp.eval(pt.tau);
        let via_word = trace_direct(&sl(1, 2), &pt).unwrap();
        assert!(
            (via_poly - via_word).norm() <= 1e-10 * (1.0 + via_word.norm()),
            "poly {via_poly} vs word {via_word}"
        );
    }

    #[test]
    fn twist_shifts_integer_traces() {
        // tr_{n/1}(λ, τ+λ) = tr_{(n+1)/1}(λ, τ)
        let lam = c(1.1, 0.3);
        let tau = c(0.2, -0.4);
        for n in -3i64..3 {
            let a = trace_poly(&sl(n, 1), lam).unwrap().eval(tau + lam);
            let b = trace_poly(&sl(n + 1, 1), lam).unwrap().eval(tau);
            assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn parity_support_is_exact() {
        let lam = c(0.8, 0.1);
        for s in [sl(1, 2), sl(2, 5), sl(-3, 7), sl(5, 8)] {
            let tp = trace_poly(&s, lam).unwrap();
            let q = tp.q();
            for k in -q..=q {
                if (k - q) % 2 != 0 {
                    assert_eq!(tp.coeff(k), c(0.0, 0.0), "slope {s}, k = {k}");
                }
            }
        }
    }

    #[test]
    fn leading_coefficients_multiply() {
        let lam = c(1.4, -0.2);
        let pairs = [((1, 2), (1, 3)), ((0, 1), (1, 1)), ((2, 5), (1, 2))];
        for ((p1, q1), (p2, q2)) in pairs {
            let a = trace_poly(&sl(p1, q1), lam).unwrap();
            let b = trace_poly(&sl(p2, q2), lam).unwrap();
            let med = sl(p1 + p2, q1 + q2);
            let m = trace_poly(&med, lam).unwrap();
            for sign in [1i64, -1] {
                let lhs = m.coeff(sign * m.q());
                let rhs = a.coeff(sign * a.q()) * b.coeff(sign * b.q());
                assert!(
                    (lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()),
                    "mediant {med} sign {sign}"
                );
            }
        }
    }

    #[test]
    fn real_lambda_gives_real_coefficients() {
        for l in [0.5, 1.0, 2.0, 4.0] {
            for s in [sl(1, 2), sl(3, 5), sl(-2, 7), sl(7, 9), sl(-13, 20)] {
                let tp = trace_poly(&s, c(l, 0.0)).unwrap();
                let q = tp.q();
                for k in -q..=q {
                    let ck = tp.coeff(k);
                    assert!(
                        ck.im.abs() <= 1e-9 * (1.0 + ck.norm()),
                        "slope {s}, l = {l}, k = {k}, c = {ck}"
                    );
                }
                assert!(tp.coeff(q).norm() > 0.0);
                assert!(tp.coeff(-q).norm() > 0.0);
            }
        }
    }

    #[test]
    fn eval_shift_by_two_pi_parity() {
        let lam = c(1.0, 0.2);
        let tau = c(0.7, -0.5);
        for s in [sl(1, 2), sl(2, 3), sl(1, 4)] {
            let tp = trace_poly(&s, lam).unwrap();
            let shifted = tp.eval(tau + c(0.0, 2.0 * core::f64::consts::PI));
            let plain = tp.eval(tau);
            let sign = if s.q() % 2 == 0 { 1.0 } else { -1.0 };
            assert!((shifted - sign * plain).norm() <= 1e-9 * (1.0 + plain.norm()));
        }
    }

    #[test]
    fn degenerate_length_rejected() {
        assert_eq!(trace_poly(&sl(0, 1), c(0.0, 0.0)), Err(Error::DegenerateLength));
    }

    #[test]
    fn bisection_integer_band() {
        // q = 1, j = 0: the zero of Im 2cosh((τ+nλ)/2) in b ∈ (−π, π) is b = 0.
        let b = real_locus_b(&sl(2, 1), 1.0, 3.0, 0).unwrap();
        assert!(b.abs() < 1e-9, "b = {b}");
    }

    #[test]
    fn bisection_quarter_slope() {
        for t in [20.0, -20.0] {
            for j in [-1i64, 0, 1] {
                let b = real_locus_b(&sl(1, 4), 1.0, t, j).unwrap();
                let pi = core::f64::consts::PI;
                assert!(b > (2 * j - 1) as f64 * pi / 4.0 && b < (2 * j + 1) as f64 * pi / 4.0);
                let tr = trace_poly(&sl(1, 4), c(1.0, 0.0)).unwrap().eval(c(t, b));
                assert!(tr.im.abs() <= 1e-10 * (1.0 + tr.norm()));
            }
        }
    }

    #[test]
    fn bisection_reports_no_sign_change() {
        // Small |t| need not produce a sign change in the j = 1 band.
        match real_locus_b(&sl(1, 4), 1.0, 0.0, 1) {
            Err(Error::NoSignChange) | Ok(_) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn oracle_equivalence_shallow(
            p in -24i64..24, q in 1i64..12,
            lre in 0.4f64..2.0, lim in -1.0f64..1.0,
            tre in -2.0f64..2.0, tim in -2.5f64..2.5,
        ) {
            let s = Slope::new(p, q).unwrap();
            let pt = FNPoint::new(c(lre, lim), c(tre, tim));
            let via_poly = trace_poly(&s, pt.lambda).unwrap().eval(pt.tau);
            let via_word = trace_direct(&s, &pt).unwrap();
            prop_assert!(
                (via_poly - via_word).norm() <= 1e-8 * (1.0 + via_word.norm()),
                "slope {}/{}: poly {} word {}", s.p(), s.q(), via_poly, via_word
            );
        }
    }
}
