//! Scalar fields used by the exterior algebra.
//!
//! Two views coexist: [`GaussianRational`] is exact and is used for every
//! differential and closure computation, while `Complex64` is used for
//! spectra and optimization. The only conversion goes exact -> float
//! ([`Scalar::to_complex`]).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact complex number `re + im·i` with arbitrary-precision rational parts.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
    }

    pub fn real(re: BigRational) -> Self {
        Self::new(re, BigRational::zero())
    }

    pub fn from_frac(num: i64, den: i64) -> Self {
        Self::real(rat(num, den))
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let d = self.norm_sqr();
        Some(Self::new(&self.re / &d, -(&self.im / &d)))
    }

    /// `i^k` for any integer exponent.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::one(),
            1 => Self::i(),
            2 => -Self::one(),
            _ => -Self::i(),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Closest Gaussian rational with denominators bounded by `max_den`.
    pub fn approximate(z: Complex64, max_den: u64) -> Self {
        Self::new(approximate_rational(z.re, max_den), approximate_rational(z.im, max_den))
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents plus the final semiconvergent).
pub fn approximate_rational(x: f64, max_den: u64) -> BigRational {
    if !x.is_finite() || x == 0.0 {
        return BigRational::zero();
    }
    let negative = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1): (u128, u128, u128, u128) = (0, 1, 1, 0);
    let max_den = max_den as u128;
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e30 {
            break;
        }
        let a_int = a as u128;
        let q2 = a_int * q1 + q0;
        if q2 > max_den {
            let k = (max_den - q0) / q1.max(1);
            let ps = k * p1 + p0;
            let qs = k * q1 + q0;
            let semi = ps as f64 / qs as f64;
            let conv = p1 as f64 / q1 as f64;
            if q1 == 0 || (qs > 0 && (semi - x.abs()).abs() < (conv - x.abs()).abs()) {
                p1 = ps;
                q1 = qs;
            }
            break;
        }
        let p2 = a_int * p1 + p0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return BigRational::zero();
    }
    let r = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    if negative {
        -r
    } else {
        r
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }
}

impl From<i64> for GaussianRational {
    fn from(v: i64) -> Self {
        Self::from_ints(v, 0)
    }
}

impl From<BigRational> for GaussianRational {
    fn from(v: BigRational) -> Self {
        Self::real(v)
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational::real(&self.re * &o.re);
        }
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl<'a> Div<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn div(self, o: &GaussianRational) -> GaussianRational {
        self * &o.inv().expect("division by zero Gaussian rational")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: GaussianRational) -> GaussianRational {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

impl<'a> Neg for &'a GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, o: &GaussianRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, o: &GaussianRational) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, o: &GaussianRational) {
        *self = &*self * o;
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical literal `a/b + c/d i` (zero parts omitted, `0` for zero).
impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => write!(f, "{} i", fmt_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "{} {} {} i", fmt_rational(&self.re), sign, fmt_rational(&self.im.abs()))
            }
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational literal `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// Parses one signed summand: `3/4`, `-1/2 i`, `i`, `-i`, `2i`, `i/2`.
fn parse_summand(s: &str) -> Result<GaussianRational> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.to_string()),
        None => (false, s.strip_prefix('+').unwrap_or(&s).to_string()),
    };
    let value = if let Some(pos) = body.find('i') {
        let (before, after) = body.split_at(pos);
        let after = &after[1..];
        let mut mag = if before.is_empty() { BigRational::one() } else { parse_rational(before)? };
        if let Some(den) = after.strip_prefix('/') {
            mag /= parse_rational(den)?;
        } else if !after.is_empty() {
            return Err(Error::Parse(format!("invalid imaginary literal `{s}`")));
        }
        GaussianRational::new(BigRational::zero(), mag)
    } else {
        GaussianRational::real(parse_rational(&body)?)
    };
    Ok(if neg { -value } else { value })
}

impl FromStr for GaussianRational {
    type Err = Error;

    /// Whitespace-insensitive `a/b + c/d i`; either part may be absent.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let compact = compact.trim_start_matches('(').trim_end_matches(')').to_string();
        if compact.is_empty() {
            return Err(Error::Parse("empty coefficient".into()));
        }
        let mut parts = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for (idx, &b) in bytes.iter().enumerate() {
            if idx > start && (b == b'+' || b == b'-') && bytes[idx - 1] != b'/' {
                parts.push(&compact[start..idx]);
                start = idx;
            }
        }
        parts.push(&compact[start..]);
        if parts.len() > 2 {
            return Err(Error::Parse(format!("too many summands in `{s}`")));
        }
        let mut acc = GaussianRational::zero();
        for p in parts {
            acc += &parse_summand(p)?;
        }
        Ok(acc)
    }
}

/// Common interface of the exact and floating-point coefficient fields.
pub trait Scalar:
    Clone + PartialEq + fmt::Debug + Send + Sync + Zero + One + Neg<Output = Self> + 'static
{
    fn add_ref(&self, o: &Self) -> Self;
    fn sub_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn conj(&self) -> Self;
    fn from_gaussian(g: &GaussianRational) -> Self;
    fn to_complex(&self) -> Complex64;
    /// Exact zero for rationals; `|z| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;
}

impl Scalar for GaussianRational {
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn conj(&self) -> Self {
        GaussianRational::conj(self)
    }
    fn from_gaussian(g: &GaussianRational) -> Self {
        g.clone()
    }
    fn to_complex(&self) -> Complex64 {
        GaussianRational::to_complex(self)
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

impl Scalar for Complex64 {
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn from_gaussian(g: &GaussianRational) -> Self {
        g.to_complex()
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_operations_are_exact() {
        let a: GaussianRational = "1/3 + 2/5 i".parse().unwrap();
        let b: GaussianRational = "-7/2 - i".parse().unwrap();
        let q = &a / &b;
        assert_eq!(&q * &b, a);
        assert_eq!(a.conj().im, rat(-2, 5));
        assert_eq!(&(&a + &b) - &b, a);
    }

    #[test]
    fn literal_grammar() {
        let cases = [
            ("i", GaussianRational::i()),
            ("-i", -GaussianRational::i()),
            ("(1/2 i)", GaussianRational::new(rat(0, 1), rat(1, 2))),
            ("i/2", GaussianRational::new(rat(0, 1), rat(1, 2))),
            ("-3/4 + 1/2 i", GaussianRational::new(rat(-3, 4), rat(1, 2))),
            ("  5 ", GaussianRational::from_ints(5, 0)),
            ("2i", GaussianRational::from_ints(0, 2)),
        ];
        for (s, want) in cases {
            assert_eq!(s.parse::<GaussianRational>().unwrap(), want, "{s}");
        }
        assert!("1/0".parse::<GaussianRational>().is_err());
        assert!("abc".parse::<GaussianRational>().is_err());
    }

    #[test]
    fn display_parse_round_trip() {
        for s in ["0", "3", "-1/2 i", "7/3 - 2 i", "-1 + 1/9 i"] {
            let g: GaussianRational = s.parse().unwrap();
            assert_eq!(g.to_string().parse::<GaussianRational>().unwrap(), g);
            assert_eq!(g.to_string(), s);
        }
    }

    #[test]
    fn rational_approximation() {
        assert_eq!(approximate_rational(0.5, 100), rat(1, 2));
        assert_eq!(approximate_rational(-0.333333333333, 1000), rat(-1, 3));
        let pi = approximate_rational(std::f64::consts::PI, 1000);
        assert_eq!(pi, rat(355, 113));
    }
}
