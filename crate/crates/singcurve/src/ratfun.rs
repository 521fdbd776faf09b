//! Polynomials and rational functions in one variable, with Laurent
//! expansion at finite points and at infinity (chart `z = 1/w`).
//!
//! These carry the global meromorphic functions of a rational component;
//! local stalk conditions are imposed on their jet expansions.

use crate::error::{Error, Result};
use crate::jet::LaurentJet;
use crate::scalar::{Scalar, Tolerance};

/// Dense polynomial, coefficients ascending. The zero polynomial stores no
/// coefficients.
#[derive(Clone, PartialEq)]
pub struct Poly<S: Scalar> {
    coeffs: Vec<S>,
}

impl<S: Scalar> std::fmt::Debug for Poly<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_exactly_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*w^{i}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl<S: Scalar> Poly<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        let mut p = Poly { coeffs };
        p.normalize();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![S::one()] }
    }

    pub fn constant(c: S) -> Self {
        Poly::new(vec![c])
    }

    /// The variable `w`.
    pub fn var() -> Self {
        Poly::new(vec![S::zero(), S::one()])
    }

    pub fn monomial(degree: usize, c: S) -> Self {
        let mut coeffs = vec![S::zero(); degree + 1];
        coeffs[degree] = c;
        Poly::new(coeffs)
    }

    fn normalize(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_exactly_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> S {
        self.coeffs.get(i).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&S> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).add(&other.coeff(i)));
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.mul(s)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly::new(out)
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(c.mul(&S::from_int(i as i64)));
        }
        Poly::new(out)
    }

    /// Euclidean division: returns `(quotient, remainder)`.
    pub fn divrem(&self, den: &Self) -> Result<(Self, Self)> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let dd = den.degree().unwrap();
        let lead_inv = den.leading().unwrap().inv()?;
        let mut rem = self.clone();
        let mut quo: Vec<S> = Vec::new();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let factor = rem.leading().unwrap().mul(&lead_inv);
            let shift = rd - dd;
            if quo.len() < shift + 1 {
                quo.resize(shift + 1, S::zero());
            }
            quo[shift] = quo[shift].add(&factor);
            let sub = den.mul(&Poly::monomial(shift, factor));
            rem = rem.sub(&sub);
        }
        Ok((Poly::new(quo), rem))
    }

    /// Monic gcd (meaningful for the exact kind).
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return Ok(a);
        }
        let lead_inv = a.leading().unwrap().inv()?;
        Ok(a.scale(&lead_inv))
    }

    /// Substitutes `w -> p + z`, returning a polynomial in `z`.
    pub fn shift_to(&self, p: &S) -> Self {
        // Horner in (z + p)
        let mut acc = Poly::zero();
        let zp = Poly::new(vec![p.clone(), S::one()]);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&zp).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// `z^deg * p(1/z)`: the reversed coefficient list.
    pub fn reversed(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Poly::new(coeffs)
    }

    /// Order of vanishing at 0 (count of leading zero coefficients).
    pub fn ord_at_zero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_exactly_zero())
    }

    /// Jet of the polynomial in its own variable renamed to `coord`.
    pub fn to_jet(&self, coord: &str, trunc: i64) -> LaurentJet<S> {
        LaurentJet::new(coord, 0, self.coeffs.clone(), trunc)
    }

    pub fn to_numeric(&self) -> Poly<crate::scalar::NumericScalar> {
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| crate::scalar::NumericScalar(c.to_complex()))
                .collect(),
        }
    }

    /// Human-readable form in the given variable name.
    pub fn format_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_exactly_zero() {
                continue;
            }
            let lit = c.format_literal();
            let term = match i {
                0 => lit,
                1 if lit == "1" => var.to_string(),
                1 => format!("{lit}*{var}"),
                _ if lit == "1" => format!("{var}^{i}"),
                _ => format!("{lit}*{var}^{i}"),
            };
            parts.push(term);
        }
        parts.join(" + ")
    }
}

/// A point on the rational line plus the point at infinity. The local chart
/// is `z = w - p` at finite points and `z = 1/w` at infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum P1Point<S: Scalar> {
    Finite(S),
    Infinity,
}

impl<S: Scalar> P1Point<S> {
    pub fn finite(value: S) -> Self {
        P1Point::Finite(value)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, P1Point::Infinity)
    }
}

impl<S: Scalar> std::fmt::Display for P1Point<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            P1Point::Finite(v) => write!(f, "{}", v.format_literal()),
            P1Point::Infinity => write!(f, "inf"),
        }
    }
}

/// Reduced rational function `num/den`, denominator monic. The exact kind is
/// gcd-reduced canonically; the numeric kind only normalizes the leading
/// denominator coefficient.
#[derive(Clone, PartialEq)]
pub struct RatFun<S: Scalar> {
    num: Poly<S>,
    den: Poly<S>,
}

impl<S: Scalar> std::fmt::Debug for RatFun<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:?})/({:?})", self.num, self.den)
    }
}

impl<S: Scalar> RatFun<S> {
    pub fn new(num: Poly<S>, den: Poly<S>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut f = RatFun { num, den };
        f.reduce()?;
        Ok(f)
    }

    fn reduce(&mut self) -> Result<()> {
        if self.num.is_zero() {
            self.den = Poly::one();
            return Ok(());
        }
        if S::EXACT {
            let g = self.num.gcd(&self.den)?;
            if let Some(d) = g.degree() {
                if d > 0 {
                    self.num = self.num.divrem(&g)?.0;
                    self.den = self.den.divrem(&g)?.0;
                }
            }
        }
        let lead_inv = self.den.leading().unwrap().inv()?;
        self.num = self.num.scale(&lead_inv);
        self.den = self.den.scale(&lead_inv);
        Ok(())
    }

    pub fn zero() -> Self {
        RatFun {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RatFun {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn constant(c: S) -> Self {
        RatFun {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn var() -> Self {
        RatFun {
            num: Poly::var(),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly<S>) -> Self {
        RatFun { num: p, den: Poly::one() }
    }

    pub fn num(&self) -> &Poly<S> {
        &self.num
    }

    pub fn den(&self) -> &Poly<S> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the denominator is constant.
    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        RatFun::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        RatFun::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFun::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn scale(&self, s: &S) -> Self {
        RatFun {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
    }

    /// Order at a point: positive for zeros, negative for poles.
    /// `None` for the zero function.
    pub fn order_at(&self, p: &P1Point<S>) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        match p {
            P1Point::Finite(v) => {
                let n = self.num.shift_to(v).ord_at_zero().unwrap() as i64;
                let d = self.den.shift_to(v).ord_at_zero().unwrap() as i64;
                Some(n - d)
            }
            P1Point::Infinity => {
                let n = self.num.degree().unwrap() as i64;
                let d = self.den.degree().unwrap() as i64;
                Some(d - n)
            }
        }
    }

    /// Evaluates at a finite point; errors at poles.
    pub fn eval(&self, x: &S) -> Result<S> {
        let d = self.den.eval(x);
        if d.is_exactly_zero() {
            return Err(Error::PoleEvaluation(format!("denominator vanishes at {x}")));
        }
        self.num.eval(x).div(&d)
    }

    /// Evaluates at a point of the projective line; errors at poles.
    pub fn eval_at(&self, p: &P1Point<S>) -> Result<S> {
        match p {
            P1Point::Finite(v) => self.eval(v),
            P1Point::Infinity => {
                let jet = self.expand_at(&P1Point::Infinity, "z", 1)?;
                match jet.ord() {
                    Some(o) if o < 0 => Err(Error::PoleEvaluation("pole at infinity".into())),
                    _ => jet.coeff(0),
                }
            }
        }
    }

    /// Laurent expansion in the local chart at `p`, known to `O(z^high)`.
    /// The returned jet starts at the actual order of the function, which
    /// may be higher than any requested depth.
    pub fn expand_at(&self, p: &P1Point<S>, coord: &str, high: i64) -> Result<LaurentJet<S>> {
        if self.is_zero() {
            return Ok(LaurentJet::zero(coord, high));
        }
        let (num_z, den_z) = match p {
            P1Point::Finite(v) => (self.num.shift_to(v), self.den.shift_to(v)),
            P1Point::Infinity => {
                let nd = self.num.degree().unwrap() as i64;
                let dd = self.den.degree().unwrap() as i64;
                // f(1/z) = z^(dd-nd) * rev(num)/rev(den)
                let mut num_r = self.num.reversed();
                let shift = dd - nd;
                if shift > 0 {
                    num_r = num_r.mul(&Poly::monomial(shift as usize, S::one()));
                    (num_r, self.den.reversed())
                } else if shift < 0 {
                    let den_r = self.den.reversed().mul(&Poly::monomial((-shift) as usize, S::one()));
                    (num_r, den_r)
                } else {
                    (num_r, self.den.reversed())
                }
            }
        };
        let ord_d = den_z.ord_at_zero().unwrap() as i64;
        let work = high + 2 * ord_d + 2;
        let jn = num_z.to_jet(coord, work);
        let jd = den_z.to_jet(coord, work);
        let inv = jd.inv(&Tolerance::default_rank())?;
        Ok(jn.mul(&inv)?.truncate_to(high))
    }

    pub fn derivative(&self) -> Result<Self> {
        RatFun::new(
            self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative())),
            self.den.mul(&self.den),
        )
    }

    pub fn to_numeric(&self) -> RatFun<crate::scalar::NumericScalar> {
        RatFun {
            num: self.num.to_numeric(),
            den: self.den.to_numeric(),
        }
    }

    /// Human-readable form in the given variable name.
    pub fn format_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        if self.is_polynomial() {
            let inv = self.den.coeff(0).inv().expect("monic constant");
            return self.num.scale(&inv).format_with(var);
        }
        format!("({})/({})", self.num.format_with(var), self.den.format_with(var))
    }
}
