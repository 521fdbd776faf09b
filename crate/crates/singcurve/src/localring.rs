//! Local ring stalks of curve singularities.
//!
//! A stalk is certified, never assumed: construction either proves the
//! inclusion chain `C + r^m ⊆ O ⊆ C + r` inside the working window and
//! records the stability exponent `m`, or it fails with a typed error.
//! The invariants delta and `n_q` live below `m`, so they are independent
//! of the truncation once `N >= 2m + 2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{LaurentJet, MultiJet};
use crate::linalg::{JetWindow, StalkSubspace};
use crate::scalar::{Scalar, Tolerance};

/// Generator jets are stored as Laurent polynomials known to this order, so
/// stalks can be rebuilt at any truncation up to it.
pub const MAX_GEN_TRUNC: i64 = 64;

/// Builds a polynomial jet: coefficients outside the list are known zeros.
pub fn poly_jet<S: Scalar>(coord: &str, low: i64, coeffs: Vec<S>) -> LaurentJet<S> {
    LaurentJet::new(coord, low, coeffs, MAX_GEN_TRUNC)
}

/// The ambient algebra `Obar_q = ⊕ C{t_i}` truncated at `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientStalk {
    pub coords: Vec<String>,
    pub trunc: i64,
}

impl AmbientStalk {
    pub fn new(branches: usize, trunc: i64) -> Self {
        assert!(branches >= 1 && trunc >= 2, "need b >= 1 and N >= 2");
        AmbientStalk {
            coords: (0..branches).map(|i| format!("t{i}")).collect(),
            trunc,
        }
    }

    pub fn with_coords(coords: Vec<String>, trunc: i64) -> Self {
        assert!(!coords.is_empty() && trunc >= 2);
        AmbientStalk { coords, trunc }
    }

    pub fn branches(&self) -> usize {
        self.coords.len()
    }

    pub fn window(&self) -> JetWindow {
        JetWindow::new(self.branches(), 0, self.trunc)
    }

    pub fn one<S: Scalar>(&self) -> MultiJet<S> {
        MultiJet::constant(&self.coords, S::one(), MAX_GEN_TRUNC)
    }

    /// `t^k` on one branch, zero elsewhere, known far out.
    pub fn unit<S: Scalar>(&self, branch: usize, exponent: i64) -> MultiJet<S> {
        MultiJet::unit_monomial(&self.coords, branch, exponent, MAX_GEN_TRUNC)
    }

    pub fn full_space<S: Scalar>(&self, tol: &Tolerance) -> StalkSubspace<S> {
        StalkSubspace::full(self.window(), tol)
    }

    pub fn resized(&self, trunc: i64) -> Self {
        AmbientStalk {
            coords: self.coords.clone(),
            trunc,
        }
    }
}

/// The radical: all multijets vanishing at every branch origin.
pub fn radical<S: Scalar>(ambient: &AmbientStalk, tol: &Tolerance) -> StalkSubspace<S> {
    let window = ambient.window();
    let mut rows = Vec::new();
    for b in 0..ambient.branches() {
        for e in 1..ambient.trunc {
            let mut v = vec![S::zero(); window.dim()];
            v[window.index(b, e).unwrap()] = S::one();
            rows.push(v);
        }
    }
    let mut s = StalkSubspace::span(window, rows, tol).expect("radical rows fit the window");
    s.set_stability(vec![1; ambient.branches()]);
    s
}

/// Span of the block indicator vectors plus everything of order >= m.
fn blocks_plus_radical_power<S: Scalar>(
    ambient: &AmbientStalk,
    blocks: &[Vec<usize>],
    m: i64,
    tol: &Tolerance,
) -> StalkSubspace<S> {
    let window = ambient.window();
    let mut rows = Vec::new();
    for block in blocks {
        let mut v = vec![S::zero(); window.dim()];
        for &b in block {
            v[window.index(b, 0).unwrap()] = S::one();
        }
        rows.push(v);
    }
    for b in 0..ambient.branches() {
        for e in m..ambient.trunc {
            let mut v = vec![S::zero(); window.dim()];
            v[window.index(b, e).unwrap()] = S::one();
            rows.push(v);
        }
    }
    StalkSubspace::span(window, rows, tol).expect("rows fit the window")
}

/// How a ring stalk was produced; kept so stalks can be rebuilt at another
/// truncation for stability checks.
#[derive(Clone, Debug)]
pub enum RingRecipe<S: Scalar> {
    /// The full ambient (smooth point or normalisation).
    Full,
    /// `C + ⊕ r_{p_i}^{n_i}` from positive multiplicities.
    FromDivisor(Vec<u32>),
    /// Subalgebra closure of explicit generators.
    Span(Vec<MultiJet<S>>),
}

/// A certified subring stalk `O_q ⊆ Obar_q`.
#[derive(Clone, Debug)]
pub struct LocalRingStalk<S: Scalar> {
    ambient: AmbientStalk,
    space: StalkSubspace<S>,
    stability_m: i64,
    /// Branch partition: two branches share a block iff no ring element
    /// separates their values at order 0. Ordinary stalks have one block.
    blocks: Vec<Vec<usize>>,
    recipe: RingRecipe<S>,
}

/// Per-axiom certificate of the inclusion chain and closure properties.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingAxiomReport {
    pub contains_one: bool,
    pub multiplicatively_closed: bool,
    pub chain_lower: bool,
    pub chain_upper: bool,
    pub conductor_inside_ring: bool,
    pub remark_dimension_identity: bool,
    pub delta: usize,
    pub n_q: usize,
    pub stability_exponent: i64,
    pub block_count: usize,
}

impl RingAxiomReport {
    pub fn all_pass(&self) -> bool {
        self.contains_one
            && self.multiplicatively_closed
            && self.chain_lower
            && self.chain_upper
            && self.conductor_inside_ring
            && self.remark_dimension_identity
    }
}

fn branch_blocks_from_values<S: Scalar>(
    space: &StalkSubspace<S>,
    branches: usize,
    tol: &Tolerance,
) -> Vec<Vec<usize>> {
    // two branches are in one block iff every basis vector takes equal
    // values on them at exponent 0
    let window = space.window();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    'outer: for b in 0..branches {
        for block in blocks.iter_mut() {
            let rep = block[0];
            let equal = space.basis().iter().all(|v| {
                let vb = &v[window.index(b, 0).unwrap()];
                let vr = &v[window.index(rep, 0).unwrap()];
                vb.sub(vr).is_zero(tol)
            });
            if equal {
                block.push(b);
                continue 'outer;
            }
        }
        blocks.push(vec![b]);
    }
    blocks
}

impl<S: Scalar> LocalRingStalk<S> {
    /// The full ambient as a ring: a smooth point (b = 1) or the stalk of
    /// the normalisation.
    pub fn full(ambient: AmbientStalk, tol: &Tolerance) -> Self {
        let space = ambient.full_space(tol);
        let blocks = (0..ambient.branches()).map(|b| vec![b]).collect();
        LocalRingStalk {
            ambient,
            space,
            stability_m: 0,
            blocks,
            recipe: RingRecipe::Full,
        }
    }

    /// The ring `C + ⊕ r_{p_i}^{n_i}` of an ordinary singular point defined
    /// by a divisor with the given multiplicities.
    pub fn from_divisor(multiplicities: &[u32], trunc: Option<i64>, tol: &Tolerance) -> Result<Self> {
        if multiplicities.is_empty() || multiplicities.iter().any(|&n| n == 0) {
            return Err(Error::Schema("multiplicities must be positive".into()));
        }
        let m = *multiplicities.iter().max().unwrap() as i64;
        let n = trunc.unwrap_or(2 * m + 2);
        if n <= m {
            return Err(Error::TruncationTooSmall(format!(
                "N = {n} must exceed the largest multiplicity {m}"
            )));
        }
        let ambient = AmbientStalk::new(multiplicities.len(), n);
        let window = ambient.window();
        let mut rows = Vec::new();
        let mut one = vec![S::zero(); window.dim()];
        for b in 0..ambient.branches() {
            one[window.index(b, 0).unwrap()] = S::one();
        }
        rows.push(one);
        for (b, &mult) in multiplicities.iter().enumerate() {
            for e in mult as i64..n {
                let mut v = vec![S::zero(); window.dim()];
                v[window.index(b, e).unwrap()] = S::one();
                rows.push(v);
            }
        }
        let mut space = StalkSubspace::span(window, rows, tol)?;
        space.set_stability(vec![m; ambient.branches()]);
        Ok(LocalRingStalk {
            ambient,
            space,
            stability_m: m,
            blocks: vec![(0..multiplicities.len()).collect()],
            recipe: RingRecipe::FromDivisor(multiplicities.to_vec()),
        })
    }

    /// Smallest subspace containing 1 and the generators that is closed
    /// under products up to truncation. Strict mode: the result must not
    /// separate glued branches at order 0 (the curve-germ condition
    /// `O ⊆ C + r`).
    pub fn subalgebra_closure(
        ambient: &AmbientStalk,
        generators: &[MultiJet<S>],
        tol: &Tolerance,
    ) -> Result<Self> {
        Self::closure_impl(ambient, generators, tol, true)
    }

    /// Closure variant for endomorphism rings: the result may separate
    /// branches; the partition into blocks is computed and certified
    /// blockwise.
    pub fn subalgebra_closure_split(
        ambient: &AmbientStalk,
        generators: &[MultiJet<S>],
        tol: &Tolerance,
    ) -> Result<Self> {
        Self::closure_impl(ambient, generators, tol, false)
    }

    fn closure_impl(
        ambient: &AmbientStalk,
        generators: &[MultiJet<S>],
        tol: &Tolerance,
        strict: bool,
    ) -> Result<Self> {
        let mut n = ambient.trunc;
        for _attempt in 0..4 {
            if n > MAX_GEN_TRUNC {
                return Err(Error::TruncationTooSmall(format!(
                    "closure needs truncation {n} beyond the generator window {MAX_GEN_TRUNC}"
                )));
            }
            let amb = ambient.resized(n);
            match Self::closure_once(&amb, generators, tol, strict)? {
                ClosureOutcome::Done(ring) => {
                    // certified window: N >= 2m + 2 so products of chain
                    // witnesses stay inside the window
                    if ring.stability_m == 0 || n >= 2 * ring.stability_m + 2 {
                        return Ok(ring);
                    }
                    n = 2 * ring.stability_m + 2;
                }
                ClosureOutcome::NeedLargerWindow => {
                    n *= 2;
                }
            }
        }
        Err(Error::TruncationTooSmall(
            "subalgebra closure did not certify a stability exponent after 3 restarts".into(),
        ))
    }

    fn closure_once(
        ambient: &AmbientStalk,
        generators: &[MultiJet<S>],
        tol: &Tolerance,
        strict: bool,
    ) -> Result<ClosureOutcome<S>> {
        let window = ambient.window();
        for g in generators {
            if let Some(ord) = g.ord() {
                if ord < 0 {
                    return Err(Error::AmbientMismatch(
                        "ring generators must be pole-free".into(),
                    ));
                }
            }
        }
        let mut jets: Vec<MultiJet<S>> = vec![ambient.one()];
        jets.extend(generators.iter().cloned());
        let jets: Vec<MultiJet<S>> = jets.iter().map(|j| j.truncate_to(window.high)).collect();
        let mut space = StalkSubspace::span_multijets(window, &jets, tol)?;
        loop {
            let basis_jets = space.basis_multijets(&ambient.coords);
            let mut new_rows = space.basis().to_vec();
            for (i, a) in basis_jets.iter().enumerate() {
                for b in basis_jets.iter().skip(i) {
                    let prod = a.mul(b)?;
                    new_rows.push(window.vector_of(&prod.truncate_to(window.high))?);
                }
            }
            let bigger = StalkSubspace::span(window, new_rows, tol)?;
            if bigger.dim() == space.dim() {
                space = bigger;
                break;
            }
            space = bigger;
        }
        let blocks = branch_blocks_from_values(&space, ambient.branches(), tol);
        if strict && blocks.len() > 1 {
            return Err(Error::SeparatesBranches);
        }
        // least m with t^m * ambient ⊆ space
        let mut m = ambient.trunc;
        'find: while m > 0 {
            for b in 0..ambient.branches() {
                let probe = ambient.unit::<S>(b, m - 1).truncate_to(window.high);
                if !space.contains(&probe)? {
                    break 'find;
                }
            }
            m -= 1;
        }
        if m >= ambient.trunc {
            return Ok(ClosureOutcome::NeedLargerWindow);
        }
        let mut space = space;
        space.set_stability(vec![m; ambient.branches()]);
        Ok(ClosureOutcome::Done(LocalRingStalk {
            ambient: ambient.clone(),
            space,
            stability_m: m,
            blocks,
            recipe: RingRecipe::Span(generators.to_vec()),
        }))
    }

    /// Rebuilds the same stalk at a different truncation.
    pub fn rebuild(&self, trunc: i64) -> Result<Self> {
        let tol = self.space.tol();
        match &self.recipe {
            RingRecipe::Full => Ok(LocalRingStalk::full(self.ambient.resized(trunc), &tol)),
            RingRecipe::FromDivisor(mults) => {
                LocalRingStalk::from_divisor(mults, Some(trunc), &tol)
            }
            RingRecipe::Span(gens) => Self::closure_impl(
                &self.ambient.resized(trunc),
                gens,
                &tol,
                self.blocks.len() == 1,
            ),
        }
    }

    pub fn ambient(&self) -> &AmbientStalk {
        &self.ambient
    }

    pub fn space(&self) -> &StalkSubspace<S> {
        &self.space
    }

    pub fn window(&self) -> JetWindow {
        self.space.window()
    }

    pub fn branches(&self) -> usize {
        self.ambient.branches()
    }

    pub fn coords(&self) -> &[String] {
        &self.ambient.coords
    }

    pub fn stability_exponent(&self) -> i64 {
        self.stability_m
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn tol(&self) -> Tolerance {
        self.space.tol()
    }

    pub fn recipe(&self) -> &RingRecipe<S> {
        &self.recipe
    }

    pub fn is_full(&self) -> bool {
        self.space.dim() == self.window().dim()
    }

    pub fn contains(&self, jet: &MultiJet<S>) -> Result<bool> {
        self.space.contains(&jet.truncate_to(self.window().high))
    }

    /// dim(Obar_q / O_q). Independent of the truncation once certified,
    /// because everything above the stability exponent lies in the ring.
    pub fn delta(&self) -> usize {
        self.window().dim() - self.space.dim()
    }

    /// The conductor ideal `{g : g * Obar ⊆ O}` and `n_q = dim(Obar/c)`,
    /// found by a direct linear solve against the ambient monomials below
    /// the stability exponent.
    pub fn conductor(&self) -> Result<(StalkSubspace<S>, usize)> {
        let window = self.window();
        let tol = self.space.tol();
        let phis = self.space.complement_functionals();
        let mut rows: Vec<Vec<S>> = Vec::new();
        for b in 0..self.branches() {
            for k in 0..self.stability_m {
                // condition: g * t^k e_b ∈ O, i.e. every complement
                // functional vanishes on the shifted copy of g
                for phi in &phis {
                    let mut row = vec![S::zero(); window.dim()];
                    for e in window.low..window.high {
                        // coefficient of g at (b, e) lands at (b, e + k)
                        if let (Some(src), Some(dst)) = (window.index(b, e), window.index(b, e + k))
                        {
                            row[src] = phi[dst].clone();
                        }
                    }
                    rows.push(row);
                }
            }
        }
        let kernel = crate::linalg::kernel(rows, window.dim(), &tol);
        let mut space = StalkSubspace::span(window, kernel, &tol)?;
        space.set_stability(vec![self.stability_m; self.branches()]);
        let n_q = window.dim() - space.dim();
        Ok((space, n_q))
    }

    /// `n_q = dim(Obar_q / c_q)`.
    pub fn n_q(&self) -> Result<usize> {
        Ok(self.conductor()?.1)
    }

    /// Certifies the chain and closure axioms one by one.
    pub fn check_ring_axioms(&self) -> Result<RingAxiomReport> {
        let tol = self.space.tol();
        let window = self.window();
        let contains_one = self.contains(&self.ambient.one())?;
        let basis_jets = self.space.basis_multijets(&self.ambient.coords);
        let mut multiplicatively_closed = true;
        'closure: for (i, a) in basis_jets.iter().enumerate() {
            for b in basis_jets.iter().skip(i) {
                let prod = a.mul(b)?.truncate_to(window.high);
                if !self.space.contains(&prod)? {
                    multiplicatively_closed = false;
                    break 'closure;
                }
            }
        }
        let lower = blocks_plus_radical_power::<S>(
            &self.ambient,
            &[(0..self.branches()).collect()],
            self.stability_m,
            &tol,
        );
        let chain_lower = self.space.contains_subspace(&lower);
        let upper = blocks_plus_radical_power::<S>(&self.ambient, &self.blocks, 1, &tol);
        let chain_upper = upper.contains_subspace(&self.space);
        let (conductor, n_q) = self.conductor()?;
        let conductor_inside_ring = self.space.contains_subspace(&conductor);
        // dim(Obar / (C_blocks + r^m)) = m * b - #blocks; trivial for m = 0
        let cm = blocks_plus_radical_power::<S>(&self.ambient, &self.blocks, self.stability_m, &tol);
        let lhs = window.dim() - cm.dim();
        let rhs = if self.stability_m == 0 {
            0
        } else {
            self.stability_m as usize * self.branches() - self.blocks.len()
        };
        Ok(RingAxiomReport {
            contains_one,
            multiplicatively_closed,
            chain_lower,
            chain_upper,
            conductor_inside_ring,
            remark_dimension_identity: lhs == rhs,
            delta: self.delta(),
            n_q,
            stability_exponent: self.stability_m,
            block_count: self.blocks.len(),
        })
    }

    pub fn to_numeric(&self) -> LocalRingStalk<crate::scalar::NumericScalar> {
        LocalRingStalk {
            ambient: self.ambient.clone(),
            space: self.space.to_numeric(),
            stability_m: self.stability_m,
            blocks: self.blocks.clone(),
            recipe: match &self.recipe {
                RingRecipe::Full => RingRecipe::Full,
                RingRecipe::FromDivisor(m) => RingRecipe::FromDivisor(m.clone()),
                RingRecipe::Span(gens) => {
                    RingRecipe::Span(gens.iter().map(|g| g.to_numeric()).collect())
                }
            },
        }
    }
}

enum ClosureOutcome<S: Scalar> {
    Done(LocalRingStalk<S>),
    NeedLargerWindow,
}
