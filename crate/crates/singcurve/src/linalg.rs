//! Row-reduced subspaces of multi-branch jet windows.
//!
//! All stalk-level objects (rings, conductors, divisor modules, form spaces)
//! are represented as reduced-echelon bases of one shared finite coordinate
//! window. Pivot selection is exact for the exact scalar kind and uses
//! partial pivoting with a relative rank tolerance for the numeric kind.

use crate::error::{Error, Result};
use crate::jet::{LaurentJet, MultiJet};
use crate::scalar::{Scalar, Tolerance};

/// Shared coordinate window: `branches` copies of the exponent range
/// `low .. high` (exclusive), flattened branch-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JetWindow {
    pub branches: usize,
    pub low: i64,
    pub high: i64,
}

impl JetWindow {
    pub fn new(branches: usize, low: i64, high: i64) -> Self {
        assert!(high >= low, "empty window");
        JetWindow { branches, low, high }
    }

    pub fn width(&self) -> usize {
        (self.high - self.low) as usize
    }

    pub fn dim(&self) -> usize {
        self.branches * self.width()
    }

    pub fn index(&self, branch: usize, exponent: i64) -> Option<usize> {
        if branch >= self.branches || exponent < self.low || exponent >= self.high {
            return None;
        }
        Some(branch * self.width() + (exponent - self.low) as usize)
    }

    pub fn coords(&self, index: usize) -> (usize, i64) {
        let w = self.width();
        (index / w, self.low + (index % w) as i64)
    }

    /// Flattens a multijet whose known window covers this one.
    pub fn vector_of<S: Scalar>(&self, jet: &MultiJet<S>) -> Result<Vec<S>> {
        if jet.branch_count() != self.branches {
            return Err(Error::AmbientMismatch(format!(
                "expected {} branches, got {}",
                self.branches,
                jet.branch_count()
            )));
        }
        let mut v = vec![S::zero(); self.dim()];
        for b in 0..self.branches {
            let branch = jet.branch(b);
            if let Some(ord) = branch.ord() {
                if ord < self.low {
                    return Err(Error::WindowMissing {
                        exponent: ord,
                        low: self.low,
                        high: self.high,
                    });
                }
            }
            if branch.trunc() < self.high {
                return Err(Error::TruncationTooSmall(format!(
                    "branch {} known only to O(t^{}), window needs {}",
                    b,
                    branch.trunc(),
                    self.high
                )));
            }
            for e in self.low..self.high {
                v[self.index(b, e).unwrap()] = branch.coeff(e)?;
            }
        }
        Ok(v)
    }

    pub fn multijet_of<S: Scalar>(&self, coords: &[String], v: &[S]) -> MultiJet<S> {
        let jets = (0..self.branches)
            .map(|b| {
                let w = self.width();
                LaurentJet::new(
                    &coords[b],
                    self.low,
                    v[b * w..(b + 1) * w].to_vec(),
                    self.high,
                )
            })
            .collect();
        MultiJet::new(jets).expect("window has >= 1 branch")
    }
}

/// Reduced row echelon form. Returns the nonzero rows and their pivot
/// columns. Numeric pivoting is by magnitude with threshold
/// `tol.eps * max|entry|`.
pub fn rref<S: Scalar>(rows: Vec<Vec<S>>, tol: &Tolerance) -> (Vec<Vec<S>>, Vec<usize>) {
    let mut m: Vec<Vec<S>> = rows.into_iter().filter(|r| !r.is_empty()).collect();
    if m.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let ncols = m[0].len();
    let scale = if S::EXACT {
        0.0
    } else {
        m.iter()
            .flat_map(|r| r.iter())
            .map(|c| c.magnitude())
            .fold(0.0_f64, f64::max)
    };
    let threshold = Tolerance::new(tol.eps * scale.max(1.0));
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..ncols {
        // find pivot row
        let mut best: Option<usize> = None;
        for r in rank..m.len() {
            if !m[r][col].is_zero(&threshold) {
                match best {
                    None => best = Some(r),
                    Some(b) => {
                        if !S::EXACT && m[r][col].magnitude() > m[b][col].magnitude() {
                            best = Some(r);
                        }
                    }
                }
                if S::EXACT {
                    break;
                }
            }
        }
        let Some(prow) = best else { continue };
        m.swap(rank, prow);
        let inv = m[rank][col].inv().expect("pivot nonzero");
        for c in m[rank].iter_mut() {
            *c = c.mul(&inv);
        }
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_exactly_zero() {
                let factor = m[r][col].clone();
                for c in 0..ncols {
                    let delta = factor.mul(&m[rank][c]);
                    m[r][c] = m[r][c].sub(&delta);
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    m.truncate(rank);
    // clean tiny residue in numeric mode
    if !S::EXACT {
        for row in m.iter_mut() {
            for c in row.iter_mut() {
                if c.is_zero(&threshold) {
                    *c = S::zero();
                }
            }
        }
    }
    (m, pivots)
}

/// Kernel of the linear map given by `rows` (each row one functional) on a
/// space of dimension `ncols`. Returns an echelon basis of the null space.
pub fn kernel<S: Scalar>(rows: Vec<Vec<S>>, ncols: usize, tol: &Tolerance) -> Vec<Vec<S>> {
    let (rr, pivots) = rref(rows, tol);
    let mut basis = Vec::new();
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    for free in 0..ncols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![S::zero(); ncols];
        v[free] = S::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = rr[r][free].neg();
        }
        basis.push(v);
    }
    basis
}

/// Solves `A x = b` exactly/numerically by elimination. Returns `None` when
/// inconsistent; when underdetermined, free variables are set to zero.
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[S], tol: &Tolerance) -> Option<Vec<S>> {
    let nrows = a.len();
    if nrows == 0 {
        return Some(Vec::new());
    }
    let ncols = a[0].len();
    let mut aug: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let scale = if S::EXACT {
        1.0
    } else {
        aug.iter()
            .flat_map(|r| r.iter())
            .map(|c| c.magnitude())
            .fold(0.0_f64, f64::max)
            .max(1.0)
    };
    let threshold = Tolerance::new(tol.eps * scale);
    let (rr, pivots) = rref(std::mem::take(&mut aug), &threshold);
    let mut x = vec![S::zero(); ncols];
    for (r, &p) in pivots.iter().enumerate() {
        if p == ncols {
            return None; // pivot in the rhs column: inconsistent
        }
        x[p] = rr[r][ncols].clone();
    }
    Some(x)
}

/// A row-reduced linear subspace of a jet window.
#[derive(Clone, Debug)]
pub struct StalkSubspace<S: Scalar> {
    window: JetWindow,
    basis: Vec<Vec<S>>,
    pivots: Vec<usize>,
    /// If set, the subspace provably contains every vector supported on
    /// branch `i` at exponents `>= stability[i]`.
    stability: Option<Vec<i64>>,
    tol: Tolerance,
}

impl<S: Scalar> StalkSubspace<S> {
    /// Row-reduces a spanning set.
    pub fn span(window: JetWindow, vectors: Vec<Vec<S>>, tol: &Tolerance) -> Result<Self> {
        for v in &vectors {
            if v.len() != window.dim() {
                return Err(Error::AmbientMismatch(format!(
                    "vector length {} vs window dimension {}",
                    v.len(),
                    window.dim()
                )));
            }
        }
        let (basis, pivots) = rref(vectors, tol);
        Ok(StalkSubspace {
            window,
            basis,
            pivots,
            stability: None,
            tol: *tol,
        })
    }

    pub fn span_multijets(window: JetWindow, jets: &[MultiJet<S>], tol: &Tolerance) -> Result<Self> {
        let vectors = jets
            .iter()
            .map(|j| window.vector_of(j))
            .collect::<Result<Vec<_>>>()?;
        Self::span(window, vectors, tol)
    }

    /// The full window as a subspace.
    pub fn full(window: JetWindow, tol: &Tolerance) -> Self {
        let mut basis = Vec::with_capacity(window.dim());
        for i in 0..window.dim() {
            let mut v = vec![S::zero(); window.dim()];
            v[i] = S::one();
            basis.push(v);
        }
        let pivots = (0..window.dim()).collect();
        StalkSubspace {
            window,
            basis,
            pivots,
            stability: Some(vec![window.low; window.branches]),
            tol: *tol,
        }
    }

    pub fn window(&self) -> JetWindow {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<S>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn stability(&self) -> Option<&[i64]> {
        self.stability.as_deref()
    }

    pub fn set_stability(&mut self, s: Vec<i64>) {
        self.stability = Some(s);
    }

    pub fn basis_multijets(&self, coords: &[String]) -> Vec<MultiJet<S>> {
        self.basis
            .iter()
            .map(|v| self.window.multijet_of(coords, v))
            .collect()
    }

    /// Reduces `v` against the basis; the remainder is zero iff `v` lies in
    /// the subspace.
    pub fn reduce(&self, v: &[S]) -> Vec<S> {
        let mut r = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let c = r[p].clone();
            if c.is_exactly_zero() {
                continue;
            }
            for (ri, bi) in r.iter_mut().zip(row) {
                *ri = ri.sub(&c.mul(bi));
            }
        }
        r
    }

    pub fn contains_vector(&self, v: &[S]) -> bool {
        let scale = if S::EXACT {
            1.0
        } else {
            v.iter().map(|c| c.magnitude()).fold(0.0_f64, f64::max).max(1.0)
        };
        let threshold = Tolerance::new(self.tol.eps * scale);
        self.reduce(v).iter().all(|c| c.is_zero(&threshold))
    }

    pub fn contains(&self, jet: &MultiJet<S>) -> Result<bool> {
        let v = self.window.vector_of(jet)?;
        Ok(self.contains_vector(&v))
    }

    pub fn contains_subspace(&self, other: &StalkSubspace<S>) -> bool {
        other.basis.iter().all(|v| self.contains_vector(v))
    }

    pub fn equals(&self, other: &StalkSubspace<S>) -> bool {
        self.dim() == other.dim() && self.contains_subspace(other)
    }

    /// dim V - dim W for W ⊆ V; errors if containment fails.
    pub fn quotient_dim(&self, sub: &StalkSubspace<S>) -> Result<usize> {
        if !self.contains_subspace(sub) {
            return Err(Error::NotContained);
        }
        Ok(self.dim() - sub.dim())
    }

    /// Smallest subspace containing both.
    pub fn sum(&self, other: &StalkSubspace<S>) -> Result<StalkSubspace<S>> {
        if self.window != other.window {
            return Err(Error::AmbientMismatch("window mismatch in sum".into()));
        }
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        StalkSubspace::span(self.window, rows, &self.tol)
    }

    /// Linear functionals that vanish exactly on the subspace; a vector lies
    /// in the subspace iff all of them vanish on it. One functional per
    /// non-pivot coordinate.
    pub fn complement_functionals(&self) -> Vec<Vec<S>> {
        let dim = self.window.dim();
        let pivot_set: std::collections::BTreeSet<usize> = self.pivots.iter().copied().collect();
        let mut out = Vec::new();
        for c in 0..dim {
            if pivot_set.contains(&c) {
                continue;
            }
            let mut phi = vec![S::zero(); dim];
            phi[c] = S::one();
            for (row, &p) in self.basis.iter().zip(&self.pivots) {
                phi[p] = row[c].neg();
            }
            out.push(phi);
        }
        out
    }

    /// Representatives of window-coordinates spanning a complement of the
    /// subspace (the non-pivot unit vectors).
    pub fn complement_coordinates(&self) -> Vec<usize> {
        let pivot_set: std::collections::BTreeSet<usize> = self.pivots.iter().copied().collect();
        (0..self.window.dim()).filter(|c| !pivot_set.contains(c)).collect()
    }

    pub fn to_numeric(&self) -> StalkSubspace<crate::scalar::NumericScalar> {
        StalkSubspace {
            window: self.window,
            basis: self
                .basis
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|c| crate::scalar::NumericScalar(c.to_complex()))
                        .collect()
                })
                .collect(),
            pivots: self.pivots.clone(),
            stability: self.stability.clone(),
            tol: Tolerance::default_rank(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactScalar;

    fn vecs(rows: &[&[i64]]) -> Vec<Vec<ExactScalar>> {
        rows.iter()
            .map(|r| r.iter().map(|&n| ExactScalar::from_int(n)).collect())
            .collect()
    }

    #[test]
    fn rref_span_examples() {
        let w = JetWindow::new(1, 0, 2);
        let tol = Tolerance::exact();
        // {(1,1),(2,2)} -> dim 1
        let s = StalkSubspace::span(w, vecs(&[&[1, 1], &[2, 2]]), &tol).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.basis()[0], vecs(&[&[1, 1]])[0]);
        // {} -> dim 0
        let empty = StalkSubspace::<ExactScalar>::span(w, Vec::new(), &tol).unwrap();
        assert_eq!(empty.dim(), 0);
    }

    #[test]
    fn rref_is_idempotent_and_membership_holds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5EED);
        let w = JetWindow::new(1, 0, 3);
        let tol = Tolerance::exact();
        for _ in 0..20 {
            let rows: Vec<Vec<ExactScalar>> = (0..5)
                .map(|_| {
                    (0..3)
                        .map(|_| ExactScalar::from_int(rng.gen_range(-3..=3)))
                        .collect()
                })
                .collect();
            let s = StalkSubspace::span(w, rows.clone(), &tol).unwrap();
            assert!(s.dim() <= 3);
            for r in &rows {
                assert!(s.contains_vector(r));
            }
            let again = StalkSubspace::span(w, s.basis().to_vec(), &tol).unwrap();
            assert_eq!(again.basis(), s.basis());
        }
    }

    #[test]
    fn quotient_dims() {
        let tol = Tolerance::exact();
        let w = JetWindow::new(1, 0, 2);
        let full = StalkSubspace::<ExactScalar>::full(w, &tol);
        let zero = StalkSubspace::<ExactScalar>::span(w, Vec::new(), &tol).unwrap();
        assert_eq!(full.quotient_dim(&zero).unwrap(), 2);
        assert_eq!(full.quotient_dim(&full).unwrap(), 0);
        // V = span{1, (t,-t)}, W = span{1} in 2-branch jets
        let w2 = JetWindow::new(2, 0, 2);
        let one = vec![
            ExactScalar::from_int(1),
            ExactScalar::from_int(0),
            ExactScalar::from_int(1),
            ExactScalar::from_int(0),
        ];
        let t_anti = vec![
            ExactScalar::from_int(0),
            ExactScalar::from_int(1),
            ExactScalar::from_int(0),
            ExactScalar::from_int(-1),
        ];
        let v = StalkSubspace::span(w2, vec![one.clone(), t_anti], &tol).unwrap();
        let sub = StalkSubspace::span(w2, vec![one], &tol).unwrap();
        assert_eq!(v.quotient_dim(&sub).unwrap(), 1);
        assert!(sub.quotient_dim(&v).is_err());
    }

    #[test]
    fn kernel_and_solve() {
        let tol = Tolerance::exact();
        // x + y = 0 in dim 2
        let k = kernel(vecs(&[&[1, 1]]), 2, &tol);
        assert_eq!(k.len(), 1);
        let a = vecs(&[&[1, 1], &[1, -1]]);
        let b = vec![ExactScalar::from_int(3), ExactScalar::from_int(1)];
        let x = solve(&a, &b, &tol).unwrap();
        assert_eq!(x[0], ExactScalar::from_int(2));
        assert_eq!(x[1], ExactScalar::from_int(1));
        // inconsistent
        let a2 = vecs(&[&[1, 1], &[2, 2]]);
        let b2 = vec![ExactScalar::from_int(1), ExactScalar::from_int(3)];
        assert!(solve(&a2, &b2, &tol).is_none());
    }

    #[test]
    fn complement_functionals_cut_out_the_space() {
        let tol = Tolerance::exact();
        let w = JetWindow::new(2, 0, 2);
        // node ring window: span{(1,1) at order 0, t on each branch}
        let rows = vecs(&[&[1, 0, 1, 0], &[0, 1, 0, 0], &[0, 0, 0, 1]]);
        let s = StalkSubspace::span(w, rows, &tol).unwrap();
        let phis = s.complement_functionals();
        assert_eq!(phis.len(), 1);
        // functional vanishes on the space, not on (1,0,0,0)
        let outside = vecs(&[&[1, 0, 0, 0]])[0].clone();
        let dot = |phi: &Vec<ExactScalar>, v: &Vec<ExactScalar>| {
            phi.iter()
                .zip(v)
                .fold(ExactScalar::from_int(0), |acc, (a, b)| acc.add(&a.mul(b)))
        };
        for b in s.basis() {
            assert!(dot(&phis[0], &b.clone()).is_exactly_zero());
        }
        assert!(!dot(&phis[0], &outside).is_exactly_zero());
    }
}
