//! Gaussian rationals: exact complex numbers `re + i·im` with rational parts.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number.
pub type Rational = BigRational;

/// Builds a rational `num/den`.
///
/// # Panics
/// Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// An exact complex number whose real and imaginary parts are rationals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GaussRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self { re: Rational::zero(), im: Rational::zero() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self { re: Rational::zero(), im: Rational::one() }
    }

    pub fn from_int(v: i64) -> Self {
        Self { re: Rational::from_integer(v.into()), im: Rational::zero() }
    }

    /// `a/b + i·c/d`.
    pub fn from_parts(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { re: rat(a, b), im: rat(c, d) }
    }

    pub fn real(re: Rational) -> Self {
        Self { re, im: Rational::zero() }
    }

    /// `v·i` for an integer `v`.
    pub fn imag_int(v: i64) -> Self {
        Self { re: Rational::zero(), im: Rational::from_integer(v.into()) }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|z|²` as a rational.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self { re: &self.re / &n, im: -(&self.im / &n) })
    }

    /// Multiplies by `i`.
    pub fn mul_i(&self) -> Self {
        Self { re: -self.im.clone(), im: self.re.clone() }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self { re: &self.re * r, im: &self.im * r }
    }
}

impl From<i64> for GaussRational {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl From<Rational> for GaussRational {
    fn from(v: Rational) -> Self {
        Self::real(v)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> $tr<&'a GaussRational> for &'a GaussRational {
            type Output = GaussRational;
            fn $m(self, o: &'a GaussRational) -> GaussRational {
                let f: fn(&GaussRational, &GaussRational) -> GaussRational = $body;
                f(self, o)
            }
        }
        impl $tr<GaussRational> for GaussRational {
            type Output = GaussRational;
            fn $m(self, o: GaussRational) -> GaussRational {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a GaussRational> for GaussRational {
            type Output = GaussRational;
            fn $m(self, o: &'a GaussRational) -> GaussRational {
                (&self).$m(o)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| GaussRational { re: &a.re + &b.re, im: &a.im + &b.im });
forward_binop!(Sub, sub, |a, b| GaussRational { re: &a.re - &b.re, im: &a.im - &b.im });
forward_binop!(Mul, mul, |a, b| {
    if a.im.is_zero() && b.im.is_zero() {
        return GaussRational::real(&a.re * &b.re);
    }
    GaussRational {
        re: &a.re * &b.re - &a.im * &b.im,
        im: &a.re * &b.im + &a.im * &b.re,
    }
});
forward_binop!(Div, div, |a, b| a * &b.inv().expect("division by zero Gaussian rational"));

impl AddAssign<&GaussRational> for GaussRational {
    fn add_assign(&mut self, o: &GaussRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl AddAssign for GaussRational {
    fn add_assign(&mut self, o: GaussRational) {
        *self += &o;
    }
}

impl SubAssign<&GaussRational> for GaussRational {
    fn sub_assign(&mut self, o: &GaussRational) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GaussRational> for GaussRational {
    fn mul_assign(&mut self, o: &GaussRational) {
        *self = &*self * o;
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational { re: -self.re, im: -self.im }
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational { re: -self.re.clone(), im: -self.im.clone() }
    }
}

fn fmt_rat(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRational {
    /// Canonical text: `3/2`, `-i`, `1/2-3i`, `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_text = |r: &Rational| -> String {
            if r.is_one() {
                "i".into()
            } else if (-r).is_one() {
                "-i".into()
            } else {
                format!("{}i", fmt_rat(r))
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => write!(f, "{}", im_text(&self.im)),
            (false, false) => {
                let sign = if self.im.is_positive() { "+" } else { "" };
                write!(f, "{}{}{}", fmt_rat(&self.re), sign, im_text(&self.im))
            }
        }
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses a rational written as `a` or `a/b`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

impl FromStr for GaussRational {
    type Err = String;

    /// Accepts the output of `Display`.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let bad = || format!("not a Gaussian rational: {s:?}");
        if s.is_empty() {
            return Err(bad());
        }
        let Some(body) = s.strip_suffix('i') else {
            return parse_rational(s).map(Self::real).ok_or_else(bad);
        };
        // split at the last sign that is not leading
        let split = body.char_indices().skip(1).filter(|(_, c)| *c == '+' || *c == '-').last().map(|(k, _)| k);
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im.trim_start_matches('+') {
            "" => "1".to_string(),
            "-" => "-1".to_string(),
            other => other.to_string(),
        };
        Ok(Self { re: parse_rational(re).ok_or_else(bad)?, im: parse_rational(&im).ok_or_else(bad)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_ops() {
        let a = GaussRational::from_parts(1, 2, 3, 1);
        let b = GaussRational::from_parts(-2, 1, 1, 3);
        let p = &a * &b;
        assert_eq!(&p / &b, a);
        assert_eq!(&(&a + &b) - &b, a);
        assert_eq!(&GaussRational::i() * &GaussRational::i(), GaussRational::from_int(-1));
        assert!(GaussRational::zero().inv().is_none());
    }

    #[test]
    fn display_round_trip() {
        for z in [
            GaussRational::zero(),
            GaussRational::i(),
            -GaussRational::i(),
            GaussRational::from_parts(1, 2, -3, 1),
            GaussRational::from_parts(-7, 3, 5, 4),
            GaussRational::from_parts(0, 1, -2, 3),
        ] {
            let t = z.to_string();
            assert_eq!(t.parse::<GaussRational>().unwrap(), z, "{t}");
        }
        assert!("1/0".parse::<GaussRational>().is_err());
        assert!("x".parse::<GaussRational>().is_err());
    }
}
