//! Truncated Laurent series with honest unknown-tail accounting.
//!
//! A jet knows its coefficients on `[ord, trunc)` and nothing above:
//! coefficients at exponent `>= trunc` are *unknown*, not zero. Every
//! operation propagates the worst-case known window, so multiplying jets
//! with pole parts visibly shrinks what is known instead of silently
//! pretending the tail vanishes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::{NumericScalar, Scalar, Tolerance};

/// Truncated Laurent series in one branch coordinate.
///
/// Invariants: `low + coeffs.len() <= trunc`; the first stored coefficient of
/// a nonzero jet is nonzero (exact kind) and all known coefficients up to the
/// truncation are stored. The zero jet stores no coefficients and means
/// `O(t^trunc)`.
#[derive(Clone, PartialEq)]
pub struct LaurentJet<S: Scalar> {
    coord: String,
    low: i64,
    coeffs: Vec<S>,
    trunc: i64,
}

impl<S: Scalar> std::fmt::Debug for LaurentJet<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_exactly_zero() {
                continue;
            }
            let e = self.low + i as i64;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e == 0 {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{}^{e}", self.coord)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O({}^{})", self.coord, self.trunc)
    }
}

impl<S: Scalar> LaurentJet<S> {
    /// Builds a jet from raw coefficients for exponents `low ..`, known up to
    /// `trunc` (exclusive). Coefficients at or above `trunc` are discarded;
    /// leading zeros are stripped; missing high coefficients are treated as
    /// known zeros.
    pub fn new(coord: &str, low: i64, coeffs: Vec<S>, trunc: i64) -> Self {
        let mut c = coeffs;
        if low + c.len() as i64 > trunc {
            c.truncate((trunc - low).max(0) as usize);
        }
        let mut jet = LaurentJet {
            coord: coord.to_string(),
            low,
            coeffs: c,
            trunc,
        };
        jet.normalize();
        jet
    }

    pub fn zero(coord: &str, trunc: i64) -> Self {
        LaurentJet {
            coord: coord.to_string(),
            low: trunc,
            coeffs: Vec::new(),
            trunc,
        }
    }

    pub fn one(coord: &str, trunc: i64) -> Self {
        Self::monomial(coord, 0, S::one(), trunc)
    }

    pub fn monomial(coord: &str, exponent: i64, c: S, trunc: i64) -> Self {
        Self::new(coord, exponent, vec![c], trunc)
    }

    fn normalize(&mut self) {
        while let Some(first) = self.coeffs.first() {
            if first.is_exactly_zero() {
                self.coeffs.remove(0);
                self.low += 1;
            } else {
                break;
            }
        }
        if self.coeffs.is_empty() {
            self.low = self.trunc;
        } else {
            // store the full known window [ord, trunc)
            let want = (self.trunc - self.low) as usize;
            while self.coeffs.len() < want {
                self.coeffs.push(S::zero());
            }
        }
    }

    /// Drops coefficients that fall below the numeric tolerance, then
    /// re-normalizes. No-op for the exact kind.
    pub fn chop(&self, tol: &Tolerance) -> Self {
        if S::EXACT {
            return self.clone();
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.is_zero(tol) { S::zero() } else { c.clone() })
            .collect();
        let mut jet = LaurentJet {
            coord: self.coord.clone(),
            low: self.low,
            coeffs,
            trunc: self.trunc,
        };
        jet.chop_normalize(tol);
        jet
    }

    fn chop_normalize(&mut self, tol: &Tolerance) {
        while let Some(first) = self.coeffs.first() {
            if first.is_zero(tol) {
                self.coeffs.remove(0);
                self.low += 1;
            } else {
                break;
            }
        }
        if self.coeffs.is_empty() {
            self.low = self.trunc;
        }
    }

    pub fn coord(&self) -> &str {
        &self.coord
    }

    /// Truncation order: coefficients at exponents `>= trunc` are unknown.
    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// Order of the jet, `None` for the zero jet.
    pub fn ord(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.low)
        }
    }

    fn ord_eff(&self) -> i64 {
        self.ord().unwrap_or(self.trunc)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient at `exponent`; zero below the order, error at or above the
    /// truncation where nothing is known.
    pub fn coeff(&self, exponent: i64) -> Result<S> {
        if exponent >= self.trunc {
            return Err(Error::WindowMissing {
                exponent,
                low: self.low,
                high: self.trunc,
            });
        }
        if exponent < self.low {
            return Ok(S::zero());
        }
        Ok(self.coeffs[(exponent - self.low) as usize].clone())
    }

    fn check_coord(&self, other: &Self) -> Result<()> {
        if self.coord != other.coord {
            return Err(Error::CoordinateMismatch(
                self.coord.clone(),
                other.coord.clone(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_coord(other)?;
        let trunc = self.trunc.min(other.trunc);
        let low = self.ord_eff().min(other.ord_eff()).min(trunc);
        let len = (trunc - low).max(0) as usize;
        let mut coeffs = vec![S::zero(); len];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let e = low + i as i64;
            let a = if e < self.trunc { self.coeff(e)? } else { S::zero() };
            let b = if e < other.trunc { other.coeff(e)? } else { S::zero() };
            *c = a.add(&b);
        }
        Ok(LaurentJet::new(&self.coord, low, coeffs, trunc))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        LaurentJet {
            coord: self.coord.clone(),
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            trunc: self.trunc,
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_exactly_zero() {
            return LaurentJet::zero(&self.coord, self.trunc);
        }
        LaurentJet {
            coord: self.coord.clone(),
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
            trunc: self.trunc,
        }
    }

    /// Product with honest window bookkeeping: the result is known up to
    /// `min(Na + ord(b), Nb + ord(a))`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_coord(other)?;
        let trunc = (self.trunc + other.ord_eff()).min(other.trunc + self.ord_eff());
        if self.is_zero() || other.is_zero() {
            return Ok(LaurentJet::zero(&self.coord, trunc));
        }
        let low = self.low + other.low;
        let len = (trunc - low).max(0) as usize;
        let mut coeffs = vec![S::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exactly_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let k = i + j;
                if k < len {
                    coeffs[k] = coeffs[k].add(&a.mul(b));
                }
            }
        }
        Ok(LaurentJet::new(&self.coord, low, coeffs, trunc))
    }

    /// Multiplicative inverse on the known window. The window length is
    /// preserved: a jet of order `m` known to `O(t^N)` inverts to a jet of
    /// order `-m` known to `O(t^{N-2m})`.
    pub fn inv(&self, tol: &Tolerance) -> Result<Self> {
        let m = match self.ord() {
            Some(m) => m,
            None => return Err(Error::ZeroJet),
        };
        let lead = &self.coeffs[0];
        if !S::EXACT && lead.is_zero(tol) {
            return Err(Error::LeadingCoefficientTooSmall);
        }
        let len = self.coeffs.len();
        let lead_inv = lead.inv()?;
        // coefficients of the inverse of the unit part u = self / (lead * t^m)
        let mut v = vec![S::zero(); len];
        v[0] = S::one();
        for j in 1..len {
            let mut acc = S::zero();
            for i in 1..=j {
                let u_i = self.coeffs[i].mul(&lead_inv);
                acc = acc.add(&u_i.mul(&v[j - i]));
            }
            v[j] = acc.neg();
        }
        let coeffs: Vec<S> = v.iter().map(|c| c.mul(&lead_inv)).collect();
        let trunc = self.trunc - 2 * m;
        Ok(LaurentJet::new(&self.coord, -m, coeffs, trunc))
    }

    /// Multiplies by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentJet {
            coord: self.coord.clone(),
            low: self.low + k,
            coeffs: self.coeffs.clone(),
            trunc: self.trunc + k,
        }
    }

    /// Restricts knowledge to `O(t^new_trunc)`; never extends it.
    pub fn truncate_to(&self, new_trunc: i64) -> Self {
        if new_trunc >= self.trunc {
            return self.clone();
        }
        LaurentJet::new(
            &self.coord,
            self.low,
            self.coeffs
                .iter()
                .take((new_trunc - self.low).max(0) as usize)
                .cloned()
                .collect(),
            new_trunc,
        )
    }

    /// Termwise derivative d/dt; knowledge drops by one order.
    pub fn derivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = self.low + i as i64;
            coeffs.push(c.mul(&S::from_int(e)));
        }
        LaurentJet::new(&self.coord, self.low - 1, coeffs, self.trunc - 1)
    }

    /// Evaluates the known window at a numeric point.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = self.low + i as i64;
            acc += c.to_complex() * z.powi(e as i32);
        }
        acc
    }

    pub fn to_numeric(&self) -> LaurentJet<NumericScalar> {
        LaurentJet {
            coord: self.coord.clone(),
            low: self.low,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| NumericScalar(c.to_complex()))
                .collect(),
            trunc: self.trunc,
        }
    }
}

impl LaurentJet<NumericScalar> {
    /// exp of a pole-free jet: `exp(c0) * sum h^k / k!` for the positive part.
    pub fn exp(&self) -> Result<Self> {
        if let Some(ord) = self.ord() {
            if ord < 0 {
                return Err(Error::PoleEvaluation(
                    "exp of a jet with a pole part".into(),
                ));
            }
        }
        let trunc = self.trunc;
        if trunc <= 0 {
            return Err(Error::WindowMissing {
                exponent: 0,
                low: self.low,
                high: trunc,
            });
        }
        let c0 = self.coeff(0)?;
        let scale = NumericScalar(c0.0.exp());
        let h = self.sub(&LaurentJet::monomial(&self.coord, 0, c0, trunc))?;
        let mut acc = LaurentJet::one(&self.coord, trunc);
        let mut term = LaurentJet::one(&self.coord, trunc);
        for k in 1..trunc.max(1) {
            term = term.mul(&h)?;
            if term.is_zero() {
                break;
            }
            let fact_inv = NumericScalar::new(1.0, 0.0)
                .div(&NumericScalar::new((1..=k).product::<i64>() as f64, 0.0))?;
            acc = acc.add(&term.scale(&fact_inv))?;
        }
        Ok(acc.scale(&scale))
    }
}

/// One jet per preimage branch of a singular point; a shared truncation
/// order keeps the branches comparable.
#[derive(Clone, PartialEq)]
pub struct MultiJet<S: Scalar> {
    branches: Vec<LaurentJet<S>>,
}

impl<S: Scalar> std::fmt::Debug for MultiJet<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b:?}")?;
        }
        write!(f, ")")
    }
}

impl<S: Scalar> MultiJet<S> {
    pub fn new(branches: Vec<LaurentJet<S>>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::AmbientMismatch("multijet needs >= 1 branch".into()));
        }
        let trunc = branches.iter().map(|b| b.trunc()).min().unwrap();
        Ok(MultiJet {
            branches: branches.iter().map(|b| b.truncate_to(trunc)).collect(),
        })
    }

    pub fn constant(coords: &[String], c: S, trunc: i64) -> Self {
        MultiJet {
            branches: coords
                .iter()
                .map(|n| LaurentJet::monomial(n, 0, c.clone(), trunc))
                .collect(),
        }
    }

    pub fn zero(coords: &[String], trunc: i64) -> Self {
        MultiJet {
            branches: coords.iter().map(|n| LaurentJet::zero(n, trunc)).collect(),
        }
    }

    /// `t^k` on branch `i`, zero on the others.
    pub fn unit_monomial(coords: &[String], branch: usize, exponent: i64, trunc: i64) -> Self {
        MultiJet {
            branches: coords
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    if i == branch {
                        LaurentJet::monomial(n, exponent, S::one(), trunc)
                    } else {
                        LaurentJet::zero(n, trunc)
                    }
                })
                .collect(),
        }
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn branch(&self, i: usize) -> &LaurentJet<S> {
        &self.branches[i]
    }

    pub fn branches(&self) -> &[LaurentJet<S>] {
        &self.branches
    }

    pub fn trunc(&self) -> i64 {
        self.branches.iter().map(|b| b.trunc()).min().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.branches.iter().all(|b| b.is_zero())
    }

    fn zip(&self, other: &Self, f: impl Fn(&LaurentJet<S>, &LaurentJet<S>) -> Result<LaurentJet<S>>) -> Result<Self> {
        if self.branches.len() != other.branches.len() {
            return Err(Error::AmbientMismatch(format!(
                "branch counts {} vs {}",
                self.branches.len(),
                other.branches.len()
            )));
        }
        let branches = self
            .branches
            .iter()
            .zip(&other.branches)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        MultiJet::new(branches)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.mul(b))
    }

    pub fn scale(&self, s: &S) -> Self {
        MultiJet {
            branches: self.branches.iter().map(|b| b.scale(s)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        MultiJet {
            branches: self.branches.iter().map(|b| b.neg()).collect(),
        }
    }

    pub fn truncate_to(&self, new_trunc: i64) -> Self {
        MultiJet {
            branches: self.branches.iter().map(|b| b.truncate_to(new_trunc)).collect(),
        }
    }

    /// Minimal exponent across branches, `None` when identically zero.
    pub fn ord(&self) -> Option<i64> {
        self.branches.iter().filter_map(|b| b.ord()).min()
    }

    pub fn to_numeric(&self) -> MultiJet<NumericScalar> {
        MultiJet {
            branches: self.branches.iter().map(|b| b.to_numeric()).collect(),
        }
    }
}

/// A jet tagged as the coefficient of `dt` in its branch coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct FormJet<S: Scalar> {
    pub jet: MultiJet<S>,
}

impl<S: Scalar> FormJet<S> {
    pub fn new(jet: MultiJet<S>) -> Self {
        FormJet { jet }
    }

    /// Sum over branches of the coefficient at exponent -1; errors when the
    /// window of some branch does not reach down far enough to know it.
    pub fn residue(&self) -> Result<S> {
        let mut acc = S::zero();
        for b in self.jet.branches() {
            acc = acc.add(&b.coeff(-1)?);
        }
        Ok(acc)
    }
}

/// Residue of a single-branch form `g dt`.
pub fn residue_single<S: Scalar>(g: &LaurentJet<S>) -> Result<S> {
    g.coeff(-1)
}
