//! Working-precision abstraction.
//!
//! All solver code is generic over [`Real`], implemented for `f64` (the main
//! path) and [`DoubleDouble`] (the refinement path). [`NumericContext`]
//! describes which of the two a computation runs in and carries its round-off.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_complex::Complex;
use num_traits::Num;

use crate::ddouble::DoubleDouble;
use crate::Error;

/// Scalar type the root finder can run in.
pub trait Real:
    Num + Copy + Neg<Output = Self> + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Unit round-off of the representation.
    const EPSILON: f64;
    /// Decimal digits worth printing.
    const DIGITS: usize;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn hypot(self, other: Self) -> Self;
    fn is_finite(self) -> bool;
    fn pi() -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn to_sci_string(self, digits: usize) -> String;
    fn to_dd(self) -> DoubleDouble;
    fn from_dd(x: DoubleDouble) -> Self;
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;
    const DIGITS: usize = 17;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn hypot(self, other: Self) -> Self {
        f64::hypot(self, other)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn to_sci_string(self, digits: usize) -> String {
        format!("{:.*e}", digits.max(1) - 1, self)
    }
    fn to_dd(self) -> DoubleDouble {
        DoubleDouble::from_f64(self)
    }
    fn from_dd(x: DoubleDouble) -> Self {
        x.to_f64()
    }
}

impl Real for DoubleDouble {
    const EPSILON: f64 = DoubleDouble::EPSILON;
    const DIGITS: usize = 32;

    #[inline]
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    #[inline]
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn ln(self) -> Self {
        DoubleDouble::ln(self)
    }
    fn hypot(self, other: Self) -> Self {
        DoubleDouble::hypot(self, other)
    }
    #[inline]
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
    fn pi() -> Self {
        DoubleDouble::PI
    }
    // Only used for seeding, where f64 accuracy is all that matters.
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.to_f64().sin_cos();
        (s.into(), c.into())
    }
    fn to_sci_string(self, digits: usize) -> String {
        DoubleDouble::to_sci_string(self, digits)
    }
    fn to_dd(self) -> DoubleDouble {
        self
    }
    fn from_dd(x: DoubleDouble) -> Self {
        x
    }
}

/// Modulus of a complex number without intermediate overflow.
#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub fn to_c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

#[inline]
pub fn from_c64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::from_f64(z.re), T::from_f64(z.im))
}

#[inline]
pub fn is_finite_c<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecisionMode {
    Double,
    /// Software extended precision with at least `digits` decimal digits.
    HighPrec { digits: u32 },
}

/// Precision a computation runs in, with the matching unit round-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericContext {
    mode: PrecisionMode,
    epsilon: f64,
}

impl NumericContext {
    /// Largest digit count the double-double backend can honour.
    pub const MAX_DIGITS: u32 = 31;

    pub fn double() -> Self {
        Self {
            mode: PrecisionMode::Double,
            epsilon: f64::EPSILON,
        }
    }

    pub fn high(digits: u32) -> Result<Self, Error> {
        if digits == 0 || digits > Self::MAX_DIGITS {
            return Err(Error::Domain(format!(
                "high precision supports 1..={} digits, got {digits}",
                Self::MAX_DIGITS
            )));
        }
        // the stop criterion follows the requested digits, not the backend
        Ok(Self {
            mode: PrecisionMode::HighPrec { digits },
            epsilon: 10f64.powi(-(digits as i32)).max(DoubleDouble::EPSILON),
        })
    }

    pub fn mode(&self) -> PrecisionMode {
        self.mode
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Decimal digits used when printing values of this context.
    pub fn digits(&self) -> usize {
        match self.mode {
            PrecisionMode::Double => 17,
            PrecisionMode::HighPrec { digits } => digits as usize,
        }
    }

    /// Tag stored in the binary root-set header: 0 for double, else digits.
    pub fn tag(&self) -> u8 {
        match self.mode {
            PrecisionMode::Double => 0,
            PrecisionMode::HighPrec { digits } => digits as u8,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self, Error> {
        match tag {
            0 => Ok(Self::double()),
            d => Self::high(u32::from(d)),
        }
    }
}

impl Default for NumericContext {
    fn default() -> Self {
        Self::double()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_epsilon() {
        let ctx = NumericContext::double();
        assert_eq!(ctx.epsilon(), 2f64.powi(-52));
        assert!((ctx.epsilon() - 2.22e-16).abs() < 1e-18);
    }

    #[test]
    fn high_precision_epsilon_bound() {
        for digits in 1..=NumericContext::MAX_DIGITS {
            let ctx = NumericContext::high(digits).unwrap();
            assert!(ctx.epsilon() <= 10f64.powi(-(digits as i32)));
            assert!(ctx.epsilon() > 0.0);
            if digits >= 20 {
                assert!(ctx.epsilon() < NumericContext::double().epsilon());
            }
        }
        assert!(NumericContext::high(0).is_err());
        assert!(NumericContext::high(32).is_err());
    }

    #[test]
    fn tag_round_trip() {
        for ctx in [NumericContext::double(), NumericContext::high(30).unwrap()] {
            assert_eq!(NumericContext::from_tag(ctx.tag()).unwrap(), ctx);
        }
    }
}
