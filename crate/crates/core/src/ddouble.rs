//! Double-double floating point: an unevaluated sum `hi + lo` of two `f64`
//! with `|lo| <= ulp(hi) / 2`, giving roughly 31 significant decimal digits.
//!
//! Arithmetic follows the classical error-free transformations (two-sum,
//! two-product via fused multiply-add). The exponent range is that of `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};
use std::str::FromStr;

use num_traits::{Num, One, Zero};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    /// Unit round-off, 2^-104.
    pub const EPSILON: f64 = 4.930380657631324e-32;

    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    pub const LN_2: Self = Self {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Builds a normalized value from an arbitrary pair.
    #[inline]
    pub fn from_parts(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    /// Exact product by a power of two.
    #[inline]
    pub fn ldexp(self, exp: i32) -> Self {
        let s = 2f64.powi(exp);
        Self {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }

    #[inline]
    pub fn square(self) -> Self {
        let (p, e) = two_prod(self.hi, self.hi);
        let e = e + 2.0 * self.hi * self.lo + self.lo * self.lo;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            Self::from_parts(hi, self.lo.floor())
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    pub fn trunc(self) -> Self {
        if self.is_sign_negative() {
            -(-self).floor()
        } else {
            self.floor()
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::ZERO
            } else {
                Self::from_f64(f64::NAN)
            };
        }
        let s = self.hi.sqrt();
        let (p, e) = two_prod(s, s);
        let r = self - Self::from_parts(p, e);
        let (hi, lo) = quick_two_sum(s, r.hi / (2.0 * s));
        Self { hi, lo }
    }

    pub fn hypot(self, other: Self) -> Self {
        let a = self.abs();
        let b = other.abs();
        let (big, small) = if a >= b { (a, b) } else { (b, a) };
        if big.hi == 0.0 {
            return Self::ZERO;
        }
        if !big.is_finite() {
            return Self::from_f64(f64::INFINITY);
        }
        // rescale by a power of two so squaring cannot overflow
        let e = -(big.hi.abs().log2().floor() as i32);
        let bs = big.ldexp(e);
        let ss = small.ldexp(e);
        (bs.square() + ss.square()).sqrt().ldexp(-e)
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.78 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Self::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Self::ONE;
        }
        let m = (self.hi / Self::LN_2.hi + 0.5).floor();
        // |r| <= ln(2)/2, then shrink by 2^-10 and rebuild by squaring
        let r = (self - Self::LN_2.mul_f64(m)).ldexp(-10);
        // expm1 series: s = r + r^2/2! + r^3/3! + ...
        let mut term = r;
        let mut s = r;
        let mut i = 2.0;
        loop {
            term = (term * r) / Self::from_f64(i);
            s += term;
            if term.hi.abs() <= 1e-36 * s.hi.abs() || i > 30.0 {
                break;
            }
            i += 1.0;
        }
        // expm1(2x) = 2 expm1(x) + expm1(x)^2
        for _ in 0..10 {
            s = s.ldexp(1) + s.square();
        }
        let e = s + Self::ONE;
        // split the power of two so intermediate scaling cannot overflow
        let m = m as i32;
        let half = m / 2;
        e.ldexp(half).ldexp(m - half)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::from_f64(f64::NEG_INFINITY)
            } else {
                Self::from_f64(f64::NAN)
            };
        }
        if !self.is_finite() {
            return self;
        }
        // one Newton step on exp(x) = a doubles the f64 accuracy
        let x = Self::from_f64(self.hi.ln());
        x + self * (-x).exp() - Self::ONE
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.square();
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// Scientific notation with `digits` significant digits.
    pub fn to_sci_string(self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.hi.is_nan() {
            return "NaN".into();
        }
        if self.hi.is_infinite() {
            return if self.hi > 0.0 { "inf".into() } else { "-inf".into() };
        }
        if self.hi == 0.0 {
            return format!("{}e0", zero_mantissa(digits));
        }
        let neg = self.is_sign_negative();
        let a = self.abs();
        let mut e10 = a.hi.log10().floor() as i32;
        let mut r = a / Self::from_f64(10.0).powi(e10);
        if r.hi >= 10.0 {
            r /= Self::from_f64(10.0);
            e10 += 1;
        } else if r.hi < 1.0 {
            r *= Self::from_f64(10.0);
            e10 -= 1;
        }
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let mut d = r.hi.floor();
            let mut rem = r - Self::from_f64(d);
            if rem.is_sign_negative() {
                d -= 1.0;
                rem += Self::ONE;
            } else if rem.hi >= 1.0 {
                d += 1.0;
                rem -= Self::ONE;
            }
            ds.push(d.clamp(0.0, 9.0) as u8);
            r = rem.mul_f64(10.0);
        }
        // round half up on the guard digit
        let guard = ds.pop().unwrap_or(0);
        if guard >= 5 {
            let mut i = ds.len();
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.pop();
                    e10 += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut out = String::with_capacity(digits + 8);
        if neg {
            out.push('-');
        }
        out.push((b'0' + ds[0]) as char);
        if ds.len() > 1 {
            out.push('.');
            for d in &ds[1..] {
                out.push((b'0' + d) as char);
            }
        }
        out.push('e');
        out.push_str(&e10.to_string());
        out
    }
}

fn zero_mantissa(digits: usize) -> String {
    if digits <= 1 {
        "0".into()
    } else {
        format!("0.{}", "0".repeat(digits - 1))
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({})", self.to_sci_string(32))
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(32);
        f.write_str(&self.to_sci_string(digits))
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Self::from_f64(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Self { hi: h, lo: l } + Self::from_f64(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        self - (self / b).trunc() * b
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for DoubleDouble {
            #[inline]
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::ONE
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDoubleDoubleError;

impl fmt::Display for ParseDoubleDoubleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid double-double literal")
    }
}

impl std::error::Error for ParseDoubleDoubleError {}

impl FromStr for DoubleDouble {
    type Err = ParseDoubleDoubleError;

    /// Parses decimal literals of the form `[-+]digits[.digits][e[-+]digits]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (neg, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(i) => (
                &body[..i],
                body[i + 1..]
                    .parse::<i32>()
                    .map_err(|_| ParseDoubleDoubleError)?,
            ),
            None => (body, 0),
        };
        if mant.is_empty() {
            return Err(ParseDoubleDoubleError);
        }
        let mut acc = Self::ZERO;
        let mut frac_digits = 0i32;
        let mut seen_dot = false;
        let mut any = false;
        for c in mant.chars() {
            match c {
                '.' if !seen_dot => seen_dot = true,
                '0'..='9' => {
                    any = true;
                    acc = acc.mul_f64(10.0) + Self::from_f64(f64::from(c as u8 - b'0'));
                    if seen_dot {
                        frac_digits += 1;
                    }
                }
                _ => return Err(ParseDoubleDoubleError),
            }
        }
        if !any {
            return Err(ParseDoubleDoubleError);
        }
        let e = exp - frac_digits;
        let ten = Self::from_f64(10.0);
        let v = if e >= 0 {
            acc * ten.powi(e)
        } else {
            acc / ten.powi(-e)
        };
        Ok(if neg { -v } else { v })
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = ParseDoubleDoubleError;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseDoubleDoubleError);
        }
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(s: &str) -> DoubleDouble {
        s.parse().unwrap()
    }

    fn close(a: DoubleDouble, b: DoubleDouble, rel: f64) -> bool {
        ((a - b).abs() / b.abs()).hi <= rel
    }

    // Reference values computed with mpmath at 50 digits.
    #[test]
    fn constants_and_transcendentals() {
        let e = dd("2.7182818284590452353602874713526624977572470937");
        assert!(close(DoubleDouble::ONE.exp(), e, 1e-31));
        let ln10 = dd("2.3025850929940456840179914546843642076011014887");
        assert!(close(DoubleDouble::from_f64(10.0).ln(), ln10, 1e-31));
        let pi = dd("3.1415926535897932384626433832795028841971693993");
        assert!(close(DoubleDouble::PI, pi, 1e-31));
        let sqrt2 = dd("1.4142135623730950488016887242096980785696718753");
        assert!(close(DoubleDouble::from_f64(2.0).sqrt(), sqrt2, 1e-31));
        let em50 = dd("1.9287498479639177830173428165270125747528326512e-22");
        assert!(close(DoubleDouble::from_f64(-50.0).exp(), em50, 2e-31));
    }

    #[test]
    fn exp_ln_inverse() {
        for &x in &[-300.5, -3.25, -1e-5, 0.3, 1.0, 17.75, 600.0] {
            let v = DoubleDouble::from_f64(x);
            let back = v.exp().ln();
            assert!((back - v).abs().hi <= 1e-30 * (1.0 + x.abs()), "x = {x}");
        }
    }

    #[test]
    fn division_is_accurate() {
        let third = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
        let r = third.mul_f64(3.0) - DoubleDouble::ONE;
        assert!(r.abs().hi < 1e-31);
    }

    #[test]
    fn decimal_round_trip() {
        let x = dd("-1.98553919240625127381659314291876");
        let s = x.to_sci_string(31);
        assert_eq!(s, "-1.985539192406251273816593142919e0");
        assert!(close(dd(&s), x, 1e-30));
        assert_eq!(DoubleDouble::ZERO.to_sci_string(3), "0.00e0");
        assert_eq!(dd("9.9996").to_sci_string(3), "1.00e1");
        assert_eq!(dd("1.5e-20").to_sci_string(2), "1.5e-20");
    }

    #[test]
    fn hypot_avoids_overflow() {
        let big = DoubleDouble::from_f64(1e300);
        let h = big.hypot(big);
        assert!((h.hi / 1e300 - 2f64.sqrt()).abs() < 1e-15);
        let tiny = DoubleDouble::from_f64(3e-300);
        let h = tiny.hypot(DoubleDouble::from_f64(4e-300));
        assert!((h.hi / 5e-300 - 1.0).abs() < 1e-15);
    }
}
