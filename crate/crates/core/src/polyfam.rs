//! Polynomial families defined by doubling recurrences and their Newton
//! corrections `N(z) = p_k(z) / p_k'(z)`.
//!
//! `p_k` has degree about `2^k`, so its value overflows long before `k = 40`
//! even for `|z| = 2.5`. Both value and derivative are therefore carried
//! multiplied by a common factor `α_i`, chosen each step so that the pair
//! stays of unit size, and only `γ_i = ln α_i` is stored. The ratio is
//! unaffected by the factor.

use std::fmt::Debug;
use std::sync::Arc;

use num_complex::{Complex, Complex64};

use crate::numeric::{cabs, from_c64, is_finite_c, to_c64, Real};
use crate::{DoubleDouble, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NewtonStatus {
    Ok,
    /// `p_k(z)` evaluated to exactly zero; the correction is reported as 0.
    ExactRoot,
    /// `p_k'(z)` evaluated to exactly zero while `p_k(z)` did not.
    DerivativeZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonEval<T: Real = f64> {
    pub correction: Complex<T>,
    pub status: NewtonStatus,
    /// Final `γ_k`; diagnostic only.
    pub log_scale: f64,
    /// Set when `exp(2γ_i)` underflowed to zero at some step, which drops the
    /// additive constant of the recurrence from then on.
    pub scale_underflow: bool,
}

impl<T: Real> NewtonEval<T> {
    fn ok(correction: Complex<T>, log_scale: f64, scale_underflow: bool) -> Self {
        Self {
            correction,
            status: NewtonStatus::Ok,
            log_scale,
            scale_underflow,
        }
    }

    fn exact_root(log_scale: f64, scale_underflow: bool) -> Self {
        Self {
            correction: Complex::new(T::zero(), T::zero()),
            status: NewtonStatus::ExactRoot,
            log_scale,
            scale_underflow,
        }
    }

    fn derivative_zero(log_scale: f64, scale_underflow: bool) -> Self {
        Self {
            correction: Complex::new(T::zero(), T::zero()),
            status: NewtonStatus::DerivativeZero,
            log_scale,
            scale_underflow,
        }
    }

    pub fn abs(&self) -> f64 {
        cabs(self.correction).to_f64()
    }
}

/// User-supplied family. Only the double-precision evaluation is required;
/// the double-double one defaults to rounding through it.
pub trait FamilyEvaluator: Send + Sync + Debug {
    fn name(&self) -> String;
    fn degree(&self, k: u32) -> usize;
    fn newton(&self, k: u32, z: Complex64) -> NewtonEval<f64>;

    fn newton_dd(&self, k: u32, z: Complex<DoubleDouble>) -> NewtonEval<DoubleDouble> {
        let e = self.newton(k, to_c64(z));
        NewtonEval {
            correction: from_c64(e.correction),
            status: e.status,
            log_scale: e.log_scale,
            scale_underflow: e.scale_underflow,
        }
    }
}

#[derive(Debug, Clone)]
pub enum PolynomialFamily {
    /// `p_0 = 1`, `p_{k} = x p_{k-1}^2 + 1`; degree `2^k - 1`.
    Mandelbrot,
    /// `p_k(x) = s_c^{∘k}(x) - x` with `s_c(x) = x^2 + c`; degree `2^k`.
    QuadraticComposition(Complex64),
    Custom(Arc<dyn FamilyEvaluator>),
}

impl PolynomialFamily {
    pub fn degree(&self, k: u32) -> Result<usize, Error> {
        check_k(k)?;
        match self {
            Self::Mandelbrot => Ok((1usize << k) - 1),
            Self::QuadraticComposition(_) => Ok(1usize << k),
            Self::Custom(e) => Ok(e.degree(k)),
        }
    }

    pub fn description(&self) -> String {
        match self {
            Self::Mandelbrot => "mandelbrot".to_string(),
            Self::QuadraticComposition(c) => format!("quad:{},{}", c.re, c.im),
            Self::Custom(e) => e.name(),
        }
    }
}

fn check_k(k: u32) -> Result<(), Error> {
    if k == 0 {
        return Err(Error::Domain("family index k must be at least 1".into()));
    }
    if k >= usize::BITS - 1 {
        return Err(Error::Domain(format!("family index k = {k} is too large")));
    }
    Ok(())
}

pub fn newton_correction<T: Real>(
    family: &PolynomialFamily,
    k: u32,
    z: Complex<T>,
) -> Result<NewtonEval<T>, Error> {
    check_k(k)?;
    if !is_finite_c(z) {
        return Err(Error::Validation(format!("non-finite evaluation point {z}")));
    }
    Ok(eval_unchecked(family, k, z))
}

pub fn newton_correction_batch<T: Real>(
    family: &PolynomialFamily,
    k: u32,
    zs: &[Complex<T>],
) -> Result<Vec<NewtonEval<T>>, Error> {
    check_k(k)?;
    if let Some(i) = zs.iter().position(|&z| !is_finite_c(z)) {
        return Err(Error::Validation(format!("non-finite evaluation point at index {i}")));
    }
    Ok(crate::par::map_collect(zs, |_, &z| eval_unchecked(family, k, z)))
}

pub(crate) fn eval_unchecked<T: Real>(family: &PolynomialFamily, k: u32, z: Complex<T>) -> NewtonEval<T> {
    match family {
        PolynomialFamily::Mandelbrot => mandelbrot_scaled(k, z),
        PolynomialFamily::QuadraticComposition(c) => quadratic_scaled(k, from_c64(*c), z),
        PolynomialFamily::Custom(e) => custom(e.as_ref(), k, z),
    }
}

fn custom<T: Real>(e: &dyn FamilyEvaluator, k: u32, z: Complex<T>) -> NewtonEval<T> {
    let narrow = T::EPSILON >= f64::EPSILON;
    if narrow {
        let r = e.newton(k, to_c64(z));
        NewtonEval {
            correction: from_c64(r.correction),
            ..convert_meta(&r)
        }
    } else {
        let zd = Complex::new(z.re.to_dd(), z.im.to_dd());
        let r = e.newton_dd(k, zd);
        NewtonEval {
            correction: Complex::new(T::from_dd(r.correction.re), T::from_dd(r.correction.im)),
            ..convert_meta(&r)
        }
    }
}

fn convert_meta<T: Real, U: Real>(r: &NewtonEval<U>) -> NewtonEval<T> {
    NewtonEval {
        correction: Complex::new(T::zero(), T::zero()),
        status: r.status,
        log_scale: r.log_scale,
        scale_underflow: r.scale_underflow,
    }
}

#[inline]
fn scale<T: Real>(z: Complex<T>, s: T) -> Complex<T> {
    Complex::new(z.re * s, z.im * s)
}

#[inline]
fn is_zero<T: Real>(z: Complex<T>) -> bool {
    z.re == T::zero() && z.im == T::zero()
}

fn two<T: Real>() -> T {
    T::one() + T::one()
}

/// Mandelbrot recurrence with the derivative pinned to unit modulus:
/// `v = 2 z q d + q^2`, `β = 1/|v|`, `d ← v β`, `q ← (z q^2 + e^{2γ}) β`,
/// `γ ← 2γ + ln β`, starting from `q = 1 + z`, `d = 1`, `γ = 0` (that is `p_1`).
fn mandelbrot_scaled<T: Real>(k: u32, z: Complex<T>) -> NewtonEval<T> {
    let one = T::one();
    let two = two::<T>();
    let mut q = Complex::new(one + z.re, z.im);
    let mut d = Complex::new(one, T::zero());
    let mut gamma = T::zero();
    let mut underflow = false;
    for _ in 1..k {
        let q2 = q * q;
        let v = scale(z * q * d, two) + q2;
        let nv = cabs(v);
        if nv == T::zero() || !nv.is_finite() {
            return mandelbrot_balanced(k, z);
        }
        let beta = one / nv;
        let e2g = (gamma + gamma).exp();
        underflow |= e2g == T::zero();
        let qn = z * q2 + Complex::new(e2g, T::zero());
        d = scale(v, beta);
        q = scale(qn, beta);
        gamma = gamma + gamma + beta.ln();
    }
    if is_zero(q) {
        return NewtonEval::exact_root(gamma.to_f64(), underflow);
    }
    let n = q / d;
    if !is_finite_c(n) || !gamma.is_finite() {
        return mandelbrot_balanced(k, z);
    }
    NewtonEval::ok(n, gamma.to_f64(), underflow)
}

/// Same recurrence normalised by `max(|p|, |p'|)` instead of `|p'|`. Slower
/// to reason about but survives steps where the derivative vanishes, such as
/// `z = -1` where `p_1(z) = 0` and `p_2'(z) = 0`.
fn mandelbrot_balanced<T: Real>(k: u32, z: Complex<T>) -> NewtonEval<T> {
    let one = T::one();
    let two = two::<T>();
    let mut p = Complex::new(one + z.re, z.im);
    let mut d = Complex::new(one, T::zero());
    let s0 = max(cabs(p), one);
    let mut gamma = -s0.ln();
    p = scale(p, one / s0);
    d = scale(d, one / s0);
    let mut underflow = false;
    for _ in 1..k {
        let e2g = (gamma + gamma).exp();
        underflow |= e2g == T::zero();
        let p2 = p * p;
        let pn = z * p2 + Complex::new(e2g, T::zero());
        let dn = scale(z * p * d, two) + p2;
        let s = max(cabs(pn), cabs(dn));
        if s == T::zero() {
            // both scaled values vanished: nothing left to normalise
            p = pn;
            d = dn;
            gamma = gamma + gamma;
            continue;
        }
        let beta = one / s;
        p = scale(pn, beta);
        d = scale(dn, beta);
        gamma = gamma + gamma + beta.ln();
    }
    finish(p, d, gamma, underflow)
}

/// `f_0 = z`, `f_{i+1} = f_i^2 + c` carried as `F = α f`, `D = α f'` with
/// `max(|F|, |D|) = 1`; then `p = f_k - z`, `p' = f_k' - 1`.
fn quadratic_scaled<T: Real>(k: u32, c: Complex<T>, z: Complex<T>) -> NewtonEval<T> {
    let one = T::one();
    let two = two::<T>();
    let s0 = max(cabs(z), one);
    let mut gamma = -s0.ln();
    let mut f = scale(z, one / s0);
    let mut d = Complex::new(one / s0, T::zero());
    let mut underflow = false;
    for _ in 0..k {
        let e2g = (gamma + gamma).exp();
        underflow |= e2g == T::zero();
        let v = f * f + scale(c, e2g);
        let w = scale(f * d, two);
        let s = max(cabs(v), cabs(w));
        if s == T::zero() {
            f = v;
            d = w;
            gamma = gamma + gamma;
            continue;
        }
        let beta = one / s;
        f = scale(v, beta);
        d = scale(w, beta);
        gamma = gamma + gamma + beta.ln();
    }
    let eg = gamma.exp();
    let p = f - scale(z, eg);
    let dp = d - Complex::new(eg, T::zero());
    finish(p, dp, gamma, underflow)
}

fn finish<T: Real>(p: Complex<T>, d: Complex<T>, gamma: T, underflow: bool) -> NewtonEval<T> {
    if is_zero(p) {
        return NewtonEval::exact_root(gamma.to_f64(), underflow);
    }
    if is_zero(d) {
        return NewtonEval::derivative_zero(gamma.to_f64(), underflow);
    }
    // |p|, |d| <= 1 here, so rescale the divisor before dividing
    let sd = one_over_max_abs(d);
    NewtonEval::ok(scale(p, sd) / scale(d, sd), gamma.to_f64(), underflow)
}

fn one_over_max_abs<T: Real>(z: Complex<T>) -> T {
    T::one() / max(z.re.abs(), z.im.abs())
}

#[inline]
fn max<T: Real>(a: T, b: T) -> T {
    if a >= b {
        a
    } else {
        b
    }
}

/// Unscaled evaluation of `p_k / p_k'` straight from the recurrences. Overflows
/// for large `k |ln|z||`; kept as a reference for tests and small cases.
pub fn newton_correction_unscaled(family: &PolynomialFamily, k: u32, z: Complex64) -> Complex64 {
    match family {
        PolynomialFamily::Mandelbrot => {
            let (mut p, mut d) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
            for _ in 0..k {
                let pn = z * p * p + 1.0;
                d = p * p + 2.0 * z * p * d;
                p = pn;
            }
            p / d
        }
        PolynomialFamily::QuadraticComposition(c) => {
            let (mut f, mut d) = (z, Complex64::new(1.0, 0.0));
            for _ in 0..k {
                d = 2.0 * f * d;
                f = f * f + c;
            }
            (f - z) / (d - 1.0)
        }
        PolynomialFamily::Custom(e) => e.newton(k, z).correction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn degrees() {
        let m = PolynomialFamily::Mandelbrot;
        assert_eq!(m.degree(4).unwrap(), 15);
        assert_eq!(m.degree(1).unwrap(), 1);
        let q = PolynomialFamily::QuadraticComposition(c(0.0, 1.0));
        assert_eq!(q.degree(3).unwrap(), 8);
        assert!(matches!(m.degree(0), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_gives_one() {
        for k in 1..=30 {
            let e = newton_correction(&PolynomialFamily::Mandelbrot, k, c(0.0, 0.0)).unwrap();
            assert_eq!(e.status, NewtonStatus::Ok);
            assert_eq!(e.correction, c(1.0, 0.0), "k = {k}");
        }
    }

    #[test]
    fn minus_one_is_root_of_p1() {
        let e = newton_correction(&PolynomialFamily::Mandelbrot, 1, c(-1.0, 0.0)).unwrap();
        assert_eq!(e.status, NewtonStatus::ExactRoot);
        assert_eq!(e.correction, c(0.0, 0.0));
    }

    #[test]
    fn minus_one_for_higher_k() {
        // -1 is a root of every odd member; p_1(-1) = 0 also zeroes p_2'(-1)
        for k in 2..=12 {
            let e = newton_correction(&PolynomialFamily::Mandelbrot, k, c(-1.0, 0.0)).unwrap();
            if k % 2 == 1 {
                assert_eq!(e.status, NewtonStatus::ExactRoot, "k = {k}");
                continue;
            }
            let r = newton_correction_unscaled(&PolynomialFamily::Mandelbrot, k, c(-1.0, 0.0));
            if r.is_finite() {
                assert_eq!(e.status, NewtonStatus::Ok, "k = {k}");
                assert!(rel(e.correction, r) < 1e-14, "k = {k}: {} vs {r}", e.correction);
            } else {
                assert_eq!(e.status, NewtonStatus::DerivativeZero, "k = {k}");
            }
        }
    }

    #[test]
    fn cubic_root_small_correction() {
        let e = newton_correction(&PolynomialFamily::Mandelbrot, 2, c(-1.75487766624669, 0.0)).unwrap();
        assert!(e.abs() <= 1e-12, "{}", e.abs());
    }

    #[test]
    fn no_overflow_at_k40() {
        let e = newton_correction(&PolynomialFamily::Mandelbrot, 40, c(2.5, 0.0)).unwrap();
        assert_eq!(e.status, NewtonStatus::Ok);
        assert!(e.correction.is_finite());
        assert!(!newton_correction_unscaled(&PolynomialFamily::Mandelbrot, 40, c(2.5, 0.0)).is_finite());
    }

    #[test]
    fn unit_modulus_derivative() {
        // replicate the loop and inspect |d_i| at every step
        for z in [c(0.3, 0.4), c(-1.9, 0.01), c(2.5, -1.0), c(-0.1, 0.9)] {
            let mut q = z + 1.0;
            let mut d = c(1.0, 0.0);
            let mut g = 0.0f64;
            for _ in 1..20 {
                let v = 2.0 * z * q * d + q * q;
                let b = 1.0 / v.norm();
                q = (z * q * q + (2.0 * g).exp()) * b;
                d = v * b;
                g = 2.0 * g + b.ln();
                assert!((d.norm() - 1.0).abs() <= 8.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn quadratic_c0_at_one() {
        let fam = PolynomialFamily::QuadraticComposition(c(0.0, 0.0));
        for k in 1..=20 {
            let e = newton_correction(&fam, k, c(1.0, 0.0)).unwrap();
            assert!(e.status == NewtonStatus::ExactRoot || e.abs() <= 1e-14, "k = {k}: {}", e.abs());
        }
    }

    #[test]
    fn quadratic_c0_at_zero() {
        let fam = PolynomialFamily::QuadraticComposition(c(0.0, 0.0));
        let e = newton_correction(&fam, 4, c(0.0, 0.0)).unwrap();
        assert_eq!(e.status, NewtonStatus::ExactRoot);
    }

    #[test]
    fn batch_matches_scalar() {
        let fam = PolynomialFamily::Mandelbrot;
        assert!(newton_correction_batch::<f64>(&fam, 5, &[]).unwrap().is_empty());
        let b = newton_correction_batch(&fam, 5, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(b[0].correction, c(1.0, 0.0));
        assert_eq!(b[1].correction, c(1.0, 0.0));
    }

    #[test]
    fn rejects_non_finite_and_k0() {
        let fam = PolynomialFamily::Mandelbrot;
        assert!(newton_correction(&fam, 3, c(f64::NAN, 0.0)).is_err());
        assert!(newton_correction(&fam, 0, c(0.5, 0.0)).is_err());
    }

    #[test]
    fn double_double_agrees_with_double() {
        let z = c(0.3, 0.4);
        let zd = Complex::new(DoubleDouble::from(0.3), DoubleDouble::from(0.4));
        for fam in [
            PolynomialFamily::Mandelbrot,
            PolynomialFamily::QuadraticComposition(c(-1.0, 0.0)),
        ] {
            let a = newton_correction(&fam, 9, z).unwrap().correction;
            let b = to_c64(newton_correction(&fam, 9, zd).unwrap().correction);
            assert!(rel(a, b) < 1e-12, "{a} vs {b}");
        }
    }

    #[derive(Debug)]
    struct Linear;

    impl FamilyEvaluator for Linear {
        fn name(&self) -> String {
            "x^n - 1".into()
        }
        fn degree(&self, k: u32) -> usize {
            k as usize
        }
        fn newton(&self, k: u32, z: Complex64) -> NewtonEval<f64> {
            let n = k as i32;
            NewtonEval::ok((z.powi(n) - 1.0) / (z.powi(n - 1) * n as f64), 0.0, false)
        }
    }

    #[test]
    fn custom_family_hook() {
        let fam = PolynomialFamily::Custom(Arc::new(Linear));
        assert_eq!(fam.degree(3).unwrap(), 3);
        let e = newton_correction(&fam, 3, c(1.0, 0.0)).unwrap();
        assert_eq!(e.correction, c(0.0, 0.0));
        let zd = Complex::new(DoubleDouble::from(2.0), DoubleDouble::ZERO);
        let e = newton_correction(&fam, 2, zd).unwrap();
        assert_eq!(e.correction.re.to_f64(), 0.75);
    }

    proptest! {
        #[test]
        fn scaled_matches_unscaled(k in 1u32..=20, re in -4.0f64..4.0, im in -4.0f64..4.0) {
            let z = c(re, im);
            let fam = PolynomialFamily::Mandelbrot;
            let r = newton_correction_unscaled(&fam, k, z);
            prop_assume!(r.is_finite() && r.norm() > 0.0);
            let e = newton_correction(&fam, k, z).unwrap();
            prop_assert_eq!(e.status, NewtonStatus::Ok);
            // both paths round differently; the ratio amplifies by the local
            // condition of p_k / p_k', bounded here by cond
            let cond = condition(k, z);
            prop_assert!(rel(e.correction, r) <= 10.0 * k as f64 * f64::EPSILON * cond,
                "k={} z={} rel={:e} cond={:e}", k, z, rel(e.correction, r), cond);
        }

        #[test]
        fn quadratic_scaled_matches_unscaled(k in 1u32..=12, re in -2.0f64..2.0, im in -2.0f64..2.0,
                                             cre in -2.0f64..2.0, cim in -1.0f64..1.0) {
            let z = c(re, im);
            let fam = PolynomialFamily::QuadraticComposition(c(cre, cim));
            let r = newton_correction_unscaled(&fam, k, z);
            prop_assume!(r.is_finite() && r.norm() > 0.0);
            let e = newton_correction(&fam, k, z).unwrap();
            let cond = quad_condition(k, c(cre, cim), z);
            prop_assert!(rel(e.correction, r) <= 10.0 * k as f64 * f64::EPSILON * cond,
                "k={} z={} rel={:e} cond={:e}", k, z, rel(e.correction, r), cond);
        }

        #[test]
        fn batch_is_elementwise(k in 1u32..=12, pts in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 0..64)) {
            let zs: Vec<_> = pts.iter().map(|&(a, b)| c(a, b)).collect();
            let fam = PolynomialFamily::Mandelbrot;
            let b = newton_correction_batch(&fam, k, &zs).unwrap();
            for (z, e) in zs.iter().zip(&b) {
                prop_assert_eq!(*e, newton_correction(&fam, k, *z).unwrap());
            }
        }
    }

    // Rounding-error amplification of the recurrences: each step adds at most
    // a few ulps relative to |z||p|^2 + 1 (value) and |p|^2 + 2|z||p||p'|
    // (derivative), measured against the magnitude of the exact result.
    fn condition(k: u32, z: Complex64) -> f64 {
        let (mut p, mut d) = (c(1.0, 0.0), c(0.0, 0.0));
        let (mut ap, mut ad) = (1.0f64, 0.0f64);
        for _ in 0..k {
            let np = z * p * p + 1.0;
            let nd = p * p + 2.0 * z * p * d;
            let nap = z.norm() * ap * ap + 1.0;
            let nad = ap * ap + 2.0 * z.norm() * ap * ad;
            p = np;
            d = nd;
            ap = nap;
            ad = nad;
        }
        (ap / p.norm()).max(1.0) + (ad / d.norm()).max(1.0)
    }

    fn quad_condition(k: u32, cc: Complex64, z: Complex64) -> f64 {
        let (mut f, mut d) = (z, c(1.0, 0.0));
        let (mut af, mut ad) = (z.norm(), 1.0f64);
        for _ in 0..k {
            d = 2.0 * f * d;
            ad *= 2.0 * af;
            f = f * f + cc;
            af = af * af + cc.norm();
        }
        ((af + z.norm()) / (f - z).norm()).max(1.0) + ((ad + 1.0) / (d - 1.0).norm()).max(1.0)
    }
}
