//! Binary floating point with a per-value precision, and complex numbers
//! built on it.
//!
//! A [`Real`] is `±mag · 2^exp` with `mag` holding at most `prec` bits.
//! Results of binary operations carry the larger of the two operand
//! precisions and are rounded to nearest.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Bits needed for `digits` decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32
}

#[derive(Clone)]
pub struct Real {
    neg: bool,
    mag: BigUint,
    exp: i64,
    prec: u32,
}

impl Real {
    pub fn zero(prec: u32) -> Self {
        Real {
            neg: false,
            mag: BigUint::zero(),
            exp: 0,
            prec,
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    fn rounded(neg: bool, mag: BigUint, exp: i64, prec: u32) -> Self {
        if mag.is_zero() {
            return Self::zero(prec);
        }
        let bits = mag.bits();
        let (mag, exp) = if bits > u64::from(prec) {
            let shift = bits - u64::from(prec);
            let half = BigUint::one() << (shift - 1);
            let mut m = (mag + half) >> shift;
            let mut e = exp + shift as i64;
            if m.bits() > u64::from(prec) {
                m >>= 1u32;
                e += 1;
            }
            (m, e)
        } else {
            (mag, exp)
        };
        Real {
            neg,
            mag,
            exp,
            prec,
        }
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        Self::rounded(v.sign() == Sign::Minus, v.magnitude().clone(), 0, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::from_bigint(&BigInt::from(v), prec)
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        Self::rounded(false, BigUint::from(v), 0, prec)
    }

    /// Exact conversion of a finite `f64` (then rounded to `prec`).
    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite(), "non-finite f64");
        if x == 0.0 {
            return Self::zero(prec);
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Self::rounded(neg, BigUint::from(mant), exp, prec)
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let num = Self::from_bigint(q.numer(), prec + 8);
        let den = Self::from_bigint(q.denom(), prec + 8);
        (num / den).with_prec(prec)
    }

    /// Parses a decimal literal such as `-1.25e-3`.
    pub fn parse_decimal(text: &str, prec: u32) -> Option<Self> {
        parse_decimal_rational(text).map(|q| Self::from_rational(&q, prec))
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self::rounded(self.neg, self.mag.clone(), self.exp, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mag.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg && !self.mag.is_zero()
    }

    pub fn abs(&self) -> Self {
        Real {
            neg: false,
            ..self.clone()
        }
    }

    /// `self · 2^k`, exact.
    pub fn ldexp(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Real {
            exp: self.exp + k,
            ..self.clone()
        }
    }

    /// Position of the leading bit: `|self| ∈ [2^(e−1), 2^e)`.
    fn top(&self) -> i64 {
        self.exp + self.mag.bits() as i64
    }

    fn signed_add(&self, other: &Real, negate_other: bool) -> Real {
        let prec = self.prec.max(other.prec);
        let other_neg = other.neg ^ negate_other;
        if other.is_zero() {
            return self.with_prec(prec);
        }
        if self.is_zero() {
            return Self::rounded(other_neg, other.mag.clone(), other.exp, prec);
        }
        let gap = i64::from(prec) + 4;
        if self.top() - other.top() > gap {
            return self.with_prec(prec);
        }
        if other.top() - self.top() > gap {
            return Self::rounded(other_neg, other.mag.clone(), other.exp, prec);
        }
        let e = self.exp.min(other.exp);
        let a = &self.mag << (self.exp - e) as u64;
        let b = &other.mag << (other.exp - e) as u64;
        if self.neg == other_neg {
            Self::rounded(self.neg, a + b, e, prec)
        } else {
            match a.cmp(&b) {
                Ordering::Equal => Self::zero(prec),
                Ordering::Greater => Self::rounded(self.neg, a - b, e, prec),
                Ordering::Less => Self::rounded(other_neg, b - a, e, prec),
            }
        }
    }

    fn mul_ref(&self, other: &Real) -> Real {
        let prec = self.prec.max(other.prec);
        Self::rounded(
            self.neg ^ other.neg,
            &self.mag * &other.mag,
            self.exp + other.exp,
            prec,
        )
    }

    fn div_ref(&self, other: &Real) -> Real {
        assert!(!other.is_zero(), "division by zero");
        let prec = self.prec.max(other.prec);
        if self.is_zero() {
            return Self::zero(prec);
        }
        let shift = (i64::from(prec) + 2 + other.mag.bits() as i64 - self.mag.bits() as i64).max(0);
        let q = (&self.mag << shift as u64) / &other.mag;
        Self::rounded(self.neg ^ other.neg, q, self.exp - shift - other.exp, prec)
    }

    /// Multiplication by a small integer.
    pub fn mul_u64(&self, k: u64) -> Real {
        Self::rounded(self.neg, &self.mag * BigUint::from(k), self.exp, self.prec)
    }

    pub fn sqrt(&self) -> Real {
        assert!(!self.is_negative(), "square root of a negative number");
        if self.is_zero() {
            return self.clone();
        }
        let want = 2 * i64::from(self.prec) + 4;
        let mut shift = (want - self.mag.bits() as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = (&self.mag << shift as u64).sqrt();
        Self::rounded(false, m, (self.exp - shift) / 2, self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mag.bits();
        let (top, shift) = if bits > 64 {
            (
                (&self.mag >> (bits - 64)).to_u64().expect("64 bits"),
                (bits - 64) as i64,
            )
        } else {
            (self.mag.to_u64().expect("≤ 64 bits"), 0)
        };
        let e = self.exp + shift;
        let v = scale_f64(top as f64, e);
        if self.neg {
            -v
        } else {
            v
        }
    }

    /// Exact rational value.
    pub fn to_rational(&self) -> BigRational {
        let m = BigInt::from_biguint(
            if self.neg { Sign::Minus } else { Sign::Plus },
            self.mag.clone(),
        );
        if self.exp >= 0 {
            BigRational::from_integer(m << self.exp as u64)
        } else {
            BigRational::new(m, BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Scientific notation with `digits` significant digits.
    pub fn to_sci_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let (int, e10) = self.decimal_digits(digits);
        let s = int.to_string();
        let sign = if self.neg { "-" } else { "" };
        if s.len() == 1 {
            format!("{sign}{s}e{e10}")
        } else {
            format!("{sign}{}.{}e{e10}", &s[..1], &s[1..])
        }
    }

    /// Fixed notation with `digits` significant digits for moderate
    /// magnitudes, scientific otherwise.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let (int, e10) = self.decimal_digits(digits);
        if !(-6..=20).contains(&e10) {
            return self.to_sci_string(digits);
        }
        let s = int.to_string();
        let sign = if self.neg { "-" } else { "" };
        let body = if e10 >= 0 {
            let int_len = e10 as usize + 1;
            if s.len() <= int_len {
                format!("{s}{}", "0".repeat(int_len - s.len()))
            } else {
                format!("{}.{}", &s[..int_len], &s[int_len..])
            }
        } else {
            format!("0.{}{s}", "0".repeat((-e10 - 1) as usize))
        };
        format!("{sign}{body}")
    }

    /// `(N, E)` with `N` a `digits`-digit integer and `|self| ≈ N·10^(E−digits+1)`.
    fn decimal_digits(&self, digits: usize) -> (BigUint, i64) {
        let shift = self.mag.bits().saturating_sub(64);
        let lead = (&self.mag >> shift).to_f64().unwrap_or(1.0);
        let log2 =
            self.top() as f64 - 1.0 + (lead.log2() - ((self.mag.bits() - shift) as f64 - 1.0));
        let mut e10 = (log2 * std::f64::consts::LOG10_2).floor() as i64;
        loop {
            let n = self.scaled_round(digits as i64 - 1 - e10);
            let len = n.to_string().len();
            match len.cmp(&digits) {
                Ordering::Equal => return (n, e10),
                Ordering::Greater => e10 += 1,
                Ordering::Less => e10 -= 1,
            }
        }
    }

    /// `round(|self| · 10^t)`.
    fn scaled_round(&self, t: i64) -> BigUint {
        let ten = BigUint::from(10u32);
        let mut num = self.mag.clone();
        let mut den = BigUint::one();
        if t >= 0 {
            num *= ten.pow(t as u32);
        } else {
            den *= ten.pow((-t) as u32);
        }
        if self.exp >= 0 {
            num <<= self.exp as u64;
        } else {
            den <<= (-self.exp) as u64;
        }
        (num * 2u32 + &den) / (den * 2u32)
    }
}

fn scale_f64(x: f64, e: i64) -> f64 {
    let e = e.clamp(-4000, 4000) as i32;
    let half = e / 2;
    x * 2f64.powi(half) * 2f64.powi(e - half)
}

/// Exact value of a decimal literal.
pub fn parse_decimal_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * ten.pow(scale as u32))
    } else {
        BigRational::new(digits, ten.pow((-scale) as u32))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl Real {
    pub fn cmp_value(&self, other: &Real) -> Ordering {
        let d = self.signed_add(other, true);
        if d.is_zero() {
            Ordering::Equal
        } else if d.neg {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(20))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f
            .precision()
            .unwrap_or((f64::from(self.prec) * std::f64::consts::LOG10_2) as usize);
        write!(f, "{}", self.to_decimal_string(digits))
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(mut self) -> Real {
        self.neg = !self.neg;
        self
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        -self.clone()
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                $body(self, rhs)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                $body(&self, rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                $body(self, &rhs)
            }
        }
    };
}

real_binop!(Add, add, |a: &Real, b: &Real| a.signed_add(b, false));
real_binop!(Sub, sub, |a: &Real, b: &Real| a.signed_add(b, true));
real_binop!(Mul, mul, |a: &Real, b: &Real| a.mul_ref(b));
real_binop!(Div, div, |a: &Real, b: &Real| a.div_ref(b));

/// Complex number with [`Real`] parts.
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Complex::new(Real::zero(prec), Real::zero(prec))
    }

    pub fn one(prec: u32) -> Self {
        Complex::new(Real::one(prec), Real::zero(prec))
    }

    pub fn from_real(re: Real) -> Self {
        let prec = re.prec();
        Complex::new(re, Real::zero(prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Complex::new(Real::from_f64(re, prec), Real::from_f64(im, prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Complex::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Real {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        Complex::new(&self.re / &n, -(&self.im / &n))
    }

    pub fn scale(&self, k: &Real) -> Self {
        Complex::new(&self.re * k, &self.im * k)
    }

    /// Adds a real number.
    pub fn add_real(&self, k: &Real) -> Self {
        Complex::new(&self.re + k, self.im.clone())
    }

    pub fn powu(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Complex::one(self.prec());
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn abs_f64(&self) -> f64 {
        let (re, im) = self.to_f64();
        re.hypot(im)
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}i)", self.re, self.im)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f
            .precision()
            .unwrap_or((f64::from(self.prec()) * std::f64::consts::LOG10_2) as usize);
        if self.im.is_zero() {
            write!(f, "{}", self.re.to_decimal_string(digits))
        } else {
            let sign = if self.im.is_negative() { "-" } else { "+" };
            write!(
                f,
                "{} {sign} {}i",
                self.re.to_decimal_string(digits),
                self.im.abs().to_decimal_string(digits)
            )
        }
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        -self.clone()
    }
}

macro_rules! complex_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                $body(self, rhs)
            }
        }
        impl $trait<Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                $body(&self, rhs)
            }
        }
        impl $trait<Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                $body(self, &rhs)
            }
        }
    };
}

complex_binop!(Add, add, |a: &Complex, b: &Complex| Complex::new(
    &a.re + &b.re,
    &a.im + &b.im
));
complex_binop!(Sub, sub, |a: &Complex, b: &Complex| Complex::new(
    &a.re - &b.re,
    &a.im - &b.im
));
complex_binop!(Mul, mul, |a: &Complex, b: &Complex| {
    if a.im.is_zero() && b.im.is_zero() {
        let p = a.prec().max(b.prec());
        return Complex::new(&a.re * &b.re, Real::zero(p));
    }
    Complex::new(&a.re * &b.re - &a.im * &b.im, &a.re * &b.im + &a.im * &b.re)
});
complex_binop!(Div, div, |a: &Complex, b: &Complex| a * &b.inv());

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use proptest::prelude::*;

    const P: u32 = 128;

    fn r(x: f64) -> Real {
        Real::from_f64(x, P)
    }

    #[test]
    fn basic_arithmetic_is_exact_on_dyadics() {
        assert_eq!((r(1.5) + r(2.25)).to_f64(), 3.75);
        assert_eq!((r(1.5) - r(2.25)).to_f64(), -0.75);
        assert_eq!((r(1.5) * r(-2.0)).to_f64(), -3.0);
        assert_eq!((r(3.0) / r(4.0)).to_f64(), 0.75);
        assert!((r(2.0) - r(2.0)).is_zero());
        assert_eq!(r(0.0).to_f64(), 0.0);
    }

    #[test]
    fn thirds_carry_full_precision() {
        let third = Real::one(P) / Real::from_i64(3, P);
        let err = (&third * &Real::from_i64(3, P) - Real::one(P)).abs();
        assert!(err.to_f64() < 2f64.powi(-(P as i32) + 2));
        assert_eq!(
            third.to_decimal_string(30),
            "0.333333333333333333333333333333"
        );
    }

    #[test]
    fn sci_string_with_wide_mantissa() {
        let third = Real::one(3400) / Real::from_i64(3, 3400);
        assert_eq!(third.to_sci_string(5), "3.3333e-1");
        let big = Real::from_i64(7, 3400) / Real::from_i64(3, 3400) * Real::from_i64(1 << 40, 3400);
        assert_eq!(big.to_sci_string(4), "2.566e12");
    }

    #[test]
    fn sqrt_two() {
        let s = Real::from_i64(2, P).sqrt();
        assert_eq!(
            s.to_decimal_string(35),
            "1.4142135623730950488016887242096981"
        );
        assert!(Real::zero(P).sqrt().is_zero());
    }

    #[test]
    fn decimal_parsing_and_printing() {
        let x = Real::parse_decimal("-1.25e-3", P).unwrap();
        assert_eq!(x.to_f64(), -0.00125);
        assert_eq!(x.to_sci_string(3), "-1.25e-3");
        assert_eq!(Real::from_i64(1234, P).to_decimal_string(6), "1234.00");
        assert_eq!(Real::from_i64(100, P).to_decimal_string(2), "100");
        assert_eq!(Real::from_f64(0.5, P).to_decimal_string(3), "0.500");
        assert!(Real::parse_decimal("1.2.3", P).is_none());
        assert!(Real::parse_decimal("abc", P).is_none());
        assert!(Real::parse_decimal(".", P).is_none());
        assert_eq!(Real::parse_decimal(".5", P).unwrap().to_f64(), 0.5);
    }

    #[test]
    fn complex_ops() {
        let i = Complex::from_f64(0.0, 1.0, P);
        let sq = &i * &i;
        assert_eq!(sq.to_f64(), (-1.0, 0.0));
        let z = Complex::from_f64(3.0, 4.0, P);
        assert_eq!(z.abs().to_f64(), 5.0);
        let w = &Complex::one(P) / &z;
        let (re, im) = w.to_f64();
        assert!((re - 0.12).abs() < 1e-16 && (im + 0.16).abs() < 1e-16);
        assert_eq!(i.powu(3).to_f64(), (0.0, -1.0));
        assert_eq!(z.powu(0).to_f64(), (1.0, 0.0));
    }

    #[test]
    fn far_apart_magnitudes() {
        let big = Real::from_f64(1e30, P);
        let tiny = Real::from_f64(1e-30, P);
        assert_eq!((&big + &tiny).to_f64(), 1e30);
        assert_eq!((&tiny - &big).to_f64(), -1e30);
    }

    proptest! {
        #[test]
        fn matches_f64_arithmetic(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let (x, y) = (r(a), r(b));
            prop_assert!(((&x + &y).to_f64() - (a + b)).abs() <= 1e-9 * (a.abs() + b.abs() + 1.0));
            prop_assert!(((&x * &y).to_f64() - a * b).abs() <= 1e-9 * (a * b).abs() + 1e-300);
            if b.abs() > 1e-3 {
                prop_assert!(((&x / &y).to_f64() - a / b).abs() <= 1e-9 * (a / b).abs() + 1e-300);
            }
        }

        #[test]
        fn rational_round_trip(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
            let q = BigRational::new(n.into(), d.into());
            let x = Real::from_rational(&q, P);
            let back = x.to_rational();
            let err = (back - &q).abs();
            let scale = q.abs() + BigRational::one();
            prop_assert!(err <= scale / BigRational::from_integer(BigInt::one() << 120u32));
        }
    }
}
