//! Scalar kinds: exact Gaussian rationals and complex doubles.
//!
//! Every computation path in the crate is generic over one scalar kind.
//! The exact kind decides equality exactly; the numeric kind never compares
//! without an explicit [`Tolerance`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Zero threshold for numeric comparisons. Exact scalars ignore it.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub eps: f64,
}

impl Tolerance {
    pub const fn new(eps: f64) -> Self {
        Tolerance { eps }
    }

    /// Default rank tolerance, relative to the largest entry of a matrix.
    pub fn default_rank() -> Self {
        Tolerance { eps: 1e-10 }
    }

    pub fn exact() -> Self {
        Tolerance { eps: 0.0 }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::default_rank()
    }
}

/// Common contract of the two scalar kinds.
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// True for the exact kind; drives pivot selection and zero tests.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    /// Exact scalars test exact equality with zero; numeric ones compare
    /// magnitude against `tol.eps` (callers pre-scale when relative tests
    /// are wanted).
    fn is_zero(&self, tol: &Tolerance) -> bool;
    /// Rough magnitude used for pivot selection and tolerance scaling.
    fn magnitude(&self) -> f64;
    fn to_complex(&self) -> Complex64;
    /// Parse the literal syntax of the curve files.
    fn parse_literal(s: &str) -> Result<Self>;
    /// Parse a real decimal literal like `-12`, `3.25` or `1.5e-3` into an
    /// exact rational (exact kind) or a double (numeric kind).
    fn from_decimal_str(s: &str) -> Result<Self>;
    /// Literal form used in all emitted files and reports.
    fn format_literal(&self) -> String;

    fn inv(&self) -> Result<Self> {
        Self::one().div(self)
    }

    fn is_exactly_zero(&self) -> bool {
        self.is_zero(&Tolerance::exact())
    }
}

/// Gaussian rational: exact real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactScalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ExactScalar { re, im }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        ExactScalar {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        ExactScalar {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Exact |z|^2 as a rational.
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_literal())
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_literal())
    }
}

fn rational_literal(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|e| Error::Parse(format!("{e}: `{s}`")))?;
        let d = BigInt::from_str(den.trim()).map_err(|e| Error::Parse(format!("{e}: `{s}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n = BigInt::from_str(s).map_err(|e| Error::Parse(format!("{e}: `{s}`")))?;
        Ok(BigRational::from_integer(n))
    }
}

impl Scalar for ExactScalar {
    const EXACT: bool = true;

    fn zero() -> Self {
        ExactScalar {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn one() -> Self {
        ExactScalar {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    fn from_int(n: i64) -> Self {
        ExactScalar {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    fn add(&self, other: &Self) -> Self {
        ExactScalar {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    fn sub(&self, other: &Self) -> Self {
        ExactScalar {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    fn mul(&self, other: &Self) -> Self {
        ExactScalar {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    fn div(&self, other: &Self) -> Result<Self> {
        let n = other.norm_sq();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let re = (&self.re * &other.re + &self.im * &other.im) / &n;
        let im = (&self.im * &other.re - &self.re * &other.im) / &n;
        Ok(ExactScalar { re, im })
    }

    fn neg(&self) -> Self {
        ExactScalar {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    fn conj(&self) -> Self {
        ExactScalar {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    fn is_zero(&self, _tol: &Tolerance) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn magnitude(&self) -> f64 {
        let re = self.re.to_f64().unwrap_or(f64::MAX);
        let im = self.im.to_f64().unwrap_or(f64::MAX);
        re.abs() + im.abs()
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn parse_literal(s: &str) -> Result<Self> {
        parse_exact_literal(s)
    }

    fn from_decimal_str(s: &str) -> Result<Self> {
        Ok(ExactScalar::new(rational_from_decimal(s)?, BigRational::zero()))
    }

    fn format_literal(&self) -> String {
        if self.im.is_zero() {
            return rational_literal(&self.re);
        }
        let im = if self.im.abs().is_one() {
            "i".to_string()
        } else {
            format!("{}*i", rational_literal(&self.im.abs()))
        };
        let sign = if self.im.is_negative() { "-" } else { "+" };
        if self.re.is_zero() {
            if self.im.is_negative() {
                format!("-{im}")
            } else {
                im
            }
        } else {
            format!("{}{}{}", rational_literal(&self.re), sign, im)
        }
    }
}

/// Exact rational from a decimal literal, e.g. `1.5e-3` -> 3/2000.
fn rational_from_decimal(input: &str) -> Result<BigRational> {
    let s = input.trim();
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e.parse().map_err(|_| Error::Parse(format!("bad exponent in `{s}`")))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(Error::Parse(format!("bad decimal `{s}`")));
    } else {
        digits
    };
    let n = BigInt::from_str(&digits).map_err(|e| Error::Parse(format!("{e}: `{s}`")))?;
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let pow = num_traits::pow::pow(ten, shift.unsigned_abs() as usize);
    Ok(if shift >= 0 {
        BigRational::from_integer(n * pow)
    } else {
        BigRational::new(n, pow)
    })
}

/// Parses `a/b`, `a/b+c/d*i`, `-i`, `2i`, `3-2*i` and friends.
fn parse_exact_literal(input: &str) -> Result<ExactScalar> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty scalar literal".into()));
    }
    // Split into at most two signed terms.
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (idx, ch) in s.char_indices() {
        if (ch == '+' || ch == '-') && idx > 0 {
            let prev = s[..idx].chars().last().unwrap();
            if prev != '+' && prev != '-' && prev != '/' && prev != '*' {
                terms.push(cur.clone());
                cur.clear();
            }
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut out = ExactScalar::zero();
    for t in terms {
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(&t)),
        };
        let mut val = if body == "i" {
            ExactScalar::i()
        } else if let Some(coeff) = body.strip_suffix("*i").or_else(|| body.strip_suffix('i')) {
            ExactScalar::new(BigRational::zero(), parse_rational(coeff)?)
        } else {
            ExactScalar::new(parse_rational(body)?, BigRational::zero())
        };
        if neg {
            val = val.neg();
        }
        out = out.add(&val);
    }
    Ok(out)
}

/// Complex double-precision scalar.
#[derive(Clone, Copy, PartialEq)]
pub struct NumericScalar(pub Complex64);

impl NumericScalar {
    pub fn new(re: f64, im: f64) -> Self {
        NumericScalar(Complex64::new(re, im))
    }
}

impl fmt::Debug for NumericScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_literal())
    }
}

impl fmt::Display for NumericScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_literal())
    }
}

/// 15 significant digits, stable across runs.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.14e}")
}

impl Scalar for NumericScalar {
    const EXACT: bool = false;

    fn zero() -> Self {
        NumericScalar(Complex64::new(0.0, 0.0))
    }

    fn one() -> Self {
        NumericScalar(Complex64::new(1.0, 0.0))
    }

    fn from_int(n: i64) -> Self {
        NumericScalar(Complex64::new(n as f64, 0.0))
    }

    fn add(&self, other: &Self) -> Self {
        NumericScalar(self.0 + other.0)
    }

    fn sub(&self, other: &Self) -> Self {
        NumericScalar(self.0 - other.0)
    }

    fn mul(&self, other: &Self) -> Self {
        NumericScalar(self.0 * other.0)
    }

    fn div(&self, other: &Self) -> Result<Self> {
        if other.0.norm() == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(NumericScalar(self.0 / other.0))
    }

    fn neg(&self) -> Self {
        NumericScalar(-self.0)
    }

    fn conj(&self) -> Self {
        NumericScalar(self.0.conj())
    }

    fn is_zero(&self, tol: &Tolerance) -> bool {
        self.0.norm() <= tol.eps
    }

    fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    fn to_complex(&self) -> Complex64 {
        self.0
    }

    fn parse_literal(s: &str) -> Result<Self> {
        parse_numeric_literal(s)
    }

    fn from_decimal_str(s: &str) -> Result<Self> {
        let x = f64::from_str(s.trim()).map_err(|e| Error::Parse(format!("{e}: `{s}`")))?;
        Ok(NumericScalar::new(x, 0.0))
    }

    fn format_literal(&self) -> String {
        let re = self.0.re;
        let im = self.0.im;
        if im == 0.0 {
            format_f64(re)
        } else if re == 0.0 {
            format!("{}i", format_f64(im))
        } else if im < 0.0 {
            format!("{}-{}i", format_f64(re), format_f64(-im))
        } else {
            format!("{}+{}i", format_f64(re), format_f64(im))
        }
    }
}

fn parse_numeric_literal(input: &str) -> Result<NumericScalar> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty scalar literal".into()));
    }
    // accept exact-style fractions in numeric context too
    if let Ok(exact) = parse_exact_literal(&s) {
        return Ok(NumericScalar(exact.to_complex()));
    }
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (idx, ch) in s.char_indices() {
        if (ch == '+' || ch == '-') && idx > 0 {
            let prev = s[..idx].chars().last().unwrap();
            if prev != 'e' && prev != 'E' && prev != '*' && prev != '/' {
                terms.push(cur.clone());
                cur.clear();
            }
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut out = Complex64::new(0.0, 0.0);
    for t in terms {
        if t == "i" || t == "+i" {
            out.im += 1.0;
        } else if t == "-i" {
            out.im -= 1.0;
        } else if let Some(coeff) = t.strip_suffix("*i").or_else(|| t.strip_suffix('i')) {
            out.im += f64::from_str(coeff).map_err(|e| Error::Parse(format!("{e}: `{t}`")))?;
        } else {
            out.re += f64::from_str(&t).map_err(|e| Error::Parse(format!("{e}: `{t}`")))?;
        }
    }
    Ok(NumericScalar(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_field_ops() {
        let a = ExactScalar::from_ratio(1, 2);
        let b = ExactScalar::from_ratio(1, 3);
        let s = a.add(&b);
        assert_eq!(s, ExactScalar::from_ratio(5, 6));
        let p = a.mul(&b);
        assert_eq!(p, ExactScalar::from_ratio(1, 6));
        let q = a.div(&b).unwrap();
        assert_eq!(q, ExactScalar::from_ratio(3, 2));
        let i = ExactScalar::i();
        assert_eq!(i.mul(&i), ExactScalar::from_int(-1));
        assert!(ExactScalar::zero().div(&ExactScalar::zero()).is_err());
    }

    #[test]
    fn exact_literals_roundtrip() {
        for lit in ["1/2", "-3", "1/2+2/3*i", "-i", "0", "5-i", "2i"] {
            let v = ExactScalar::parse_literal(lit).unwrap();
            let back = ExactScalar::parse_literal(&v.format_literal()).unwrap();
            assert_eq!(v, back, "literal {lit}");
        }
        assert_eq!(
            ExactScalar::parse_literal("1/2+2/3*i").unwrap(),
            ExactScalar::new(
                BigRational::new(1.into(), 2.into()),
                BigRational::new(2.into(), 3.into())
            )
        );
    }

    #[test]
    fn numeric_tolerance_is_explicit() {
        let small = NumericScalar::new(1e-12, 0.0);
        assert!(small.is_zero(&Tolerance::new(1e-10)));
        assert!(!small.is_zero(&Tolerance::new(1e-14)));
    }

    #[test]
    fn numeric_literals() {
        let v = NumericScalar::parse_literal("1.5e-3+2i").unwrap();
        assert!((v.0.re - 1.5e-3).abs() < 1e-18);
        assert!((v.0.im - 2.0).abs() < 1e-18);
        let w = NumericScalar::parse_literal("-2.5").unwrap();
        assert_eq!(w.0.re, -2.5);
    }
}
