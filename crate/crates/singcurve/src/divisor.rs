//! Generalised divisor stalks: finitely generated ring-module subspaces of
//! the Laurent-extended jet algebra.
//!
//! Degrees are differences of dimensions inside one shared finite window;
//! the certified stability exponents make them independent of the window
//! size. Local freeness is decided by a deterministic generator search plus
//! two exact obstructions (value rank above the block count, and the
//! minimal-generator count of the fibre `S / m·S`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jet::MultiJet;
use crate::linalg::{JetWindow, StalkSubspace};
use crate::localring::LocalRingStalk;
use crate::scalar::{Scalar, Tolerance};

/// Verdict of the local-freeness decision.
#[derive(Clone, Debug)]
pub enum Freeness<S: Scalar> {
    Free { generator: MultiJet<S> },
    /// Evaluation rank of the cleared module exceeds the ring block count.
    NotFreeValueRank { rank: usize, blocks: usize },
    /// `dim(S / m S)` exceeds the ring block count: more than one generator
    /// is needed.
    NotFreeGeneratorCount { needed: usize, blocks: usize },
    /// A branch of the module vanishes identically.
    NotFreeZeroBranch { branch: usize },
    /// Search budget exhausted without a certificate either way.
    NoGeneratorFound { budget: usize },
}

impl<S: Scalar> Freeness<S> {
    pub fn generator(&self) -> Option<&MultiJet<S>> {
        match self {
            Freeness::Free { generator } => Some(generator),
            _ => None,
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Freeness::Free { .. })
    }

    /// True when non-freeness is proved (not merely unresolved).
    pub fn certified_not_free(&self) -> bool {
        matches!(
            self,
            Freeness::NotFreeValueRank { .. }
                | Freeness::NotFreeGeneratorCount { .. }
                | Freeness::NotFreeZeroBranch { .. }
        )
    }

    pub fn describe(&self) -> String {
        match self {
            Freeness::Free { .. } => "free".into(),
            Freeness::NotFreeValueRank { rank, blocks } => {
                format!("not free (value rank {rank} > {blocks} block(s))")
            }
            Freeness::NotFreeGeneratorCount { needed, blocks } => {
                format!("not free (needs {needed} generators over {blocks} block(s))")
            }
            Freeness::NotFreeZeroBranch { branch } => {
                format!("not free (branch {branch} vanishes identically)")
            }
            Freeness::NoGeneratorFound { budget } => {
                format!("no generator found (certified non-free up to search budget {budget})")
            }
        }
    }
}

/// A certified module stalk over a certified local ring.
#[derive(Clone, Debug)]
pub struct DivisorStalk<S: Scalar> {
    ring: LocalRingStalk<S>,
    space: StalkSubspace<S>,
    generators: Vec<MultiJet<S>>,
    pole_bound: i64,
    branch_orders: Vec<Option<i64>>,
}

impl<S: Scalar> DivisorStalk<S> {
    /// Smallest ring-module containing the generators, computed by closing
    /// the span under products with the ring basis. Restarts with larger
    /// windows until per-branch stability is certified.
    pub fn module_closure(ring: &LocalRingStalk<S>, generators: &[MultiJet<S>]) -> Result<Self> {
        Self::module_closure_with_pole_bound(ring, generators, 0)
    }

    /// Same closure, forcing the window to reach down to `-min_pole` even
    /// when the generators themselves need less room.
    pub fn module_closure_with_pole_bound(
        ring: &LocalRingStalk<S>,
        generators: &[MultiJet<S>],
        min_pole: i64,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Schema("module needs at least one generator".into()));
        }
        let pole_bound = generators
            .iter()
            .filter_map(|g| g.ord())
            .map(|o| (-o).max(0))
            .max()
            .unwrap_or(0)
            .max(min_pole.max(0));
        // the module's branch order is the per-branch minimum over the
        // generators; stability sits at most m above the largest of them
        let branches = ring.branches();
        let zero_max = (0..branches)
            .map(|b| {
                generators
                    .iter()
                    .filter_map(|g| g.branch(b).ord())
                    .min()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
            .max(0);
        let m = ring.stability_exponent();
        let mut high = m + zero_max + 2;
        for _attempt in 0..4 {
            let needed_ring_trunc = high + pole_bound;
            let ring_big = if ring.ambient().trunc >= needed_ring_trunc {
                ring.clone()
            } else {
                ring.rebuild(needed_ring_trunc)?
            };
            match Self::closure_once(&ring_big, generators, pole_bound, high)? {
                Some(stalk) => return Ok(stalk),
                None => high += 4,
            }
        }
        Err(Error::TruncationTooSmall(
            "module closure did not certify branch stability after 3 restarts".into(),
        ))
    }

    fn closure_once(
        ring: &LocalRingStalk<S>,
        generators: &[MultiJet<S>],
        pole_bound: i64,
        high: i64,
    ) -> Result<Option<Self>> {
        let tol = ring.tol();
        let window = JetWindow::new(ring.branches(), -pole_bound, high);
        let gens: Vec<MultiJet<S>> = generators.iter().map(|g| g.truncate_to(high)).collect();
        let mut space = StalkSubspace::span_multijets(window, &gens, &tol)?;
        let ring_basis = ring.space().basis_multijets(ring.coords());
        loop {
            let module_basis = space.basis_multijets(ring.coords());
            let mut rows = space.basis().to_vec();
            for r in &ring_basis {
                for g in &module_basis {
                    let prod = r.mul(g)?.truncate_to(high);
                    rows.push(window.vector_of(&prod)?);
                }
            }
            let bigger = StalkSubspace::span(window, rows, &tol)?;
            if bigger.dim() == space.dim() {
                space = bigger;
                break;
            }
            space = bigger;
        }
        let branch_orders = branch_orders_of(&space);
        // certify per-branch stability: everything of order >= d_i + m on
        // branch i belongs to the module
        let mut stab = Vec::with_capacity(ring.branches());
        for (b, d) in branch_orders.iter().enumerate() {
            match d {
                None => stab.push(window.high),
                Some(d) => {
                    let s = d + ring.stability_exponent();
                    if s >= window.high {
                        return Ok(None);
                    }
                    for e in s..window.high {
                        let probe = ring.ambient().unit::<S>(b, e).truncate_to(window.high);
                        if !space.contains(&probe)? {
                            return Ok(None);
                        }
                    }
                    stab.push(s);
                }
            }
        }
        space.set_stability(stab);
        Ok(Some(DivisorStalk {
            ring: ring.clone(),
            space,
            generators: generators.to_vec(),
            pole_bound,
            branch_orders,
        }))
    }

    pub fn ring(&self) -> &LocalRingStalk<S> {
        &self.ring
    }

    pub fn space(&self) -> &StalkSubspace<S> {
        &self.space
    }

    pub fn window(&self) -> JetWindow {
        self.space.window()
    }

    pub fn generators(&self) -> &[MultiJet<S>] {
        &self.generators
    }

    pub fn pole_bound(&self) -> i64 {
        self.pole_bound
    }

    /// Minimal exponent of the module on each branch (the classical divisor
    /// of the lift to the normalisation, negated).
    pub fn branch_orders(&self) -> &[Option<i64>] {
        &self.branch_orders
    }

    pub fn contains(&self, jet: &MultiJet<S>) -> Result<bool> {
        self.space.contains(&jet.truncate_to(self.window().high))
    }

    /// The ring embedded into the module window.
    pub fn ring_embedded(&self) -> Result<StalkSubspace<S>> {
        let window = self.window();
        let jets = self.ring.space().basis_multijets(self.ring.coords());
        let mut rows = Vec::with_capacity(jets.len());
        for j in jets {
            rows.push(window.vector_of(&j.truncate_to(window.high))?);
        }
        let mut s = StalkSubspace::span(window, rows, &self.ring.tol())?;
        s.set_stability(vec![self.ring.stability_exponent(); self.ring.branches()]);
        Ok(s)
    }

    /// True when the stalk equals the structure ring (point not in the
    /// support of the divisor).
    pub fn equals_ring(&self) -> Result<bool> {
        Ok(self.space.equals(&self.ring_embedded()?))
    }

    /// The over-module `Obar · (generators ∪ {1} ∪ extra)`: branchwise
    /// everything above the minimal order.
    fn overmodule(&self, extra: &[MultiJet<S>]) -> Result<StalkSubspace<S>> {
        let window = self.window();
        let tol = self.ring.tol();
        let mut mins: Vec<i64> = vec![0; self.ring.branches()];
        for g in self.generators.iter().chain(extra.iter()) {
            for (b, min) in mins.iter_mut().enumerate() {
                if let Some(o) = g.branch(b).ord() {
                    if o < *min {
                        *min = o;
                    }
                }
            }
        }
        let mut rows = Vec::new();
        for (b, &min) in mins.iter().enumerate() {
            for e in min..window.high {
                let mut v = vec![S::zero(); window.dim()];
                v[window.index(b, e).ok_or_else(|| {
                    Error::TruncationTooSmall("over-module exceeds the window".into())
                })?] = S::one();
                rows.push(v);
            }
        }
        let mut s = StalkSubspace::span(window, rows, &tol)?;
        s.set_stability(mins);
        Ok(s)
    }

    /// Degree at the point: `dim H0(T/O) - dim H0(T/S)` for an over-module
    /// `T` containing both. Independent of the choice of `T`.
    pub fn degree(&self) -> Result<i64> {
        self.degree_with_overmodule(&[])
    }

    /// Same degree computed against the over-module enlarged by extra
    /// generators; used to test well-definedness.
    pub fn degree_with_overmodule(&self, extra: &[MultiJet<S>]) -> Result<i64> {
        let deepest = extra
            .iter()
            .filter_map(|g| g.ord())
            .map(|o| (-o).max(0))
            .max()
            .unwrap_or(0);
        if deepest > self.pole_bound {
            let wider =
                Self::module_closure_with_pole_bound(&self.ring, &self.generators, deepest)?;
            return wider.degree_with_overmodule(extra);
        }
        let t = self.overmodule(extra)?;
        let ring = self.ring_embedded()?;
        let a = t.quotient_dim(&ring)? as i64;
        let b = t.quotient_dim(&self.space)? as i64;
        Ok(a - b)
    }

    /// Multiplies the module by a unit multijet (order 0 and invertible on
    /// every branch).
    pub fn multiply_by_unit(&self, u: &MultiJet<S>) -> Result<DivisorStalk<S>> {
        for b in 0..u.branch_count() {
            if u.branch(b).ord() != Some(0) {
                return Err(Error::Invariant(format!(
                    "multiplier must be a unit on branch {b}"
                )));
            }
        }
        let gens: Vec<MultiJet<S>> = self
            .generators
            .iter()
            .map(|g| g.mul(u))
            .collect::<Result<Vec<_>>>()?;
        DivisorStalk::module_closure(&self.ring, &gens)
    }

    /// Rank of the evaluation map `space -> C^b` (exponent-0 coefficients
    /// per branch). Requires a pole-free module; clear a common factor
    /// first otherwise.
    pub fn preimage_value_rank(&self) -> Result<usize> {
        if self.branch_orders.iter().flatten().any(|&d| d < 0) {
            return Err(Error::PoleEvaluation(
                "value rank needs a pole-free module; clear a common factor first".into(),
            ));
        }
        Ok(self.value_rank_at(&vec![Some(0); self.ring.branches()]))
    }

    /// Rank of the map taking leading coefficients at the given per-branch
    /// exponents.
    fn value_rank_at(&self, exponents: &[Option<i64>]) -> usize {
        let window = self.window();
        let tol = self.ring.tol();
        let rows: Vec<Vec<S>> = self
            .space
            .basis()
            .iter()
            .map(|v| {
                exponents
                    .iter()
                    .enumerate()
                    .map(|(b, e)| match e {
                        Some(e) => window
                            .index(b, *e)
                            .map(|i| v[i].clone())
                            .unwrap_or_else(S::zero),
                        None => S::zero(),
                    })
                    .collect()
            })
            .collect();
        let (basis, _) = crate::linalg::rref(rows, &tol);
        basis.len()
    }

    /// `dim(S / m S)` where `m` is the maximal ideal of the ring:
    /// the minimal number of module generators, by Nakayama.
    pub fn minimal_generator_count(&self) -> Result<usize> {
        let window = self.window();
        let tol = self.ring.tol();
        let ring_basis = self.ring.space().basis_multijets(self.ring.coords());
        let module_basis = self.space.basis_multijets(self.ring.coords());
        let mut rows = Vec::new();
        for r in &ring_basis {
            // skip the block-constant part: keep only radical directions
            let in_radical = (0..r.branch_count()).all(|b| r.branch(b).ord().map_or(true, |o| o > 0));
            if !in_radical {
                // subtract the order-0 block values to land in the radical
                continue;
            }
            for g in &module_basis {
                rows.push(window.vector_of(&r.mul(g)?.truncate_to(window.high))?);
            }
        }
        // the radical part of the ring is spanned by basis elements of
        // positive order only after reduction; rebuild it explicitly
        let radical_ring = self.ring_radical_part()?;
        let mut rows2 = Vec::new();
        for r in &radical_ring {
            for g in &module_basis {
                rows2.push(window.vector_of(&r.mul(g)?.truncate_to(window.high))?);
            }
        }
        rows.extend(rows2);
        let ms = StalkSubspace::span(window, rows, &tol)?;
        self.space.quotient_dim(&ms)
    }

    /// Basis of `O ∩ r` as multijets.
    fn ring_radical_part(&self) -> Result<Vec<MultiJet<S>>> {
        let tol = self.ring.tol();
        let rwin = self.ring.window();
        let radical = crate::localring::radical::<S>(self.ring.ambient(), &tol);
        let mut rows = Vec::new();
        for v in self.ring.space().basis() {
            rows.push(v.clone());
        }
        // intersect with radical: solve for combinations with zero order-0 part
        let mut conditions: Vec<Vec<S>> = Vec::new();
        for b in 0..self.ring.branches() {
            let idx = rwin.index(b, 0).unwrap();
            conditions.push(rows.iter().map(|v| v[idx].clone()).collect());
        }
        let kernel = crate::linalg::kernel(conditions, rows.len(), &tol);
        let mut out = Vec::new();
        for combo in kernel {
            let mut v = vec![S::zero(); rwin.dim()];
            for (c, row) in combo.iter().zip(&rows) {
                for (vi, ri) in v.iter_mut().zip(row) {
                    *vi = vi.add(&c.mul(ri));
                }
            }
            out.push(rwin.multijet_of(self.ring.coords(), &v));
        }
        let _ = radical;
        Ok(out)
    }

    /// Deterministic local-freeness decision: basis candidates first, then
    /// 64 pseudo-random combinations from the fixed seed; exact
    /// obstructions are consulted before giving up.
    pub fn freeness(&self) -> Result<Freeness<S>> {
        self.freeness_with_seed(crate::DEFAULT_SEED)
    }

    /// Same decision with a caller-chosen search seed.
    pub fn freeness_with_seed(&self, seed: u64) -> Result<Freeness<S>> {
        for (b, d) in self.branch_orders.iter().enumerate() {
            if d.is_none() {
                return Ok(Freeness::NotFreeZeroBranch { branch: b });
            }
        }
        let blocks = self.ring.blocks().len();
        let needed = self.minimal_generator_count()?;
        if needed > blocks {
            return Ok(Freeness::NotFreeGeneratorCount { needed, blocks });
        }
        let rank = self.value_rank_at(&self.branch_orders.clone());
        if rank > blocks {
            return Ok(Freeness::NotFreeValueRank { rank, blocks });
        }
        let module_basis = self.space.basis_multijets(self.ring.coords());
        let mut candidates: Vec<MultiJet<S>> = module_basis.clone();
        // sums of pairs reach mixed leading terms
        for i in 0..module_basis.len() {
            for j in (i + 1)..module_basis.len() {
                candidates.push(module_basis[i].add(&module_basis[j])?);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let budget = 64;
        for _ in 0..budget {
            let mut acc = MultiJet::zero(self.ring.coords(), self.window().high);
            for v in &module_basis {
                let c = S::from_int(rng.gen_range(-3i64..=3));
                acc = acc.add(&v.scale(&c))?;
            }
            candidates.push(acc);
        }
        for f in &candidates {
            if (0..f.branch_count()).any(|b| f.branch(b).ord() != self.branch_orders[b]) {
                // a generator must attain the minimal order on every branch
                continue;
            }
            if self.generates(f)? {
                return Ok(Freeness::Free { generator: f.clone() });
            }
        }
        Ok(Freeness::NoGeneratorFound {
            budget: candidates.len(),
        })
    }

    /// Checks `ring · f = space`.
    pub fn generates(&self, f: &MultiJet<S>) -> Result<bool> {
        let window = self.window();
        let tol = self.ring.tol();
        if !self.contains(f)? {
            return Ok(false);
        }
        let ring_basis = self.ring.space().basis_multijets(self.ring.coords());
        let mut rows = Vec::new();
        for r in &ring_basis {
            rows.push(window.vector_of(&r.mul(f)?.truncate_to(window.high))?);
        }
        let of = StalkSubspace::span(window, rows, &tol)?;
        Ok(of.dim() == self.space.dim())
    }

    /// Convenience wrapper: a certified generator, or `None`.
    pub fn is_locally_free(&self) -> Result<Option<MultiJet<S>>> {
        Ok(self.freeness()?.generator().cloned())
    }

    pub fn to_numeric(&self) -> DivisorStalk<crate::scalar::NumericScalar> {
        DivisorStalk {
            ring: self.ring.to_numeric(),
            space: self.space.to_numeric(),
            generators: self.generators.iter().map(|g| g.to_numeric()).collect(),
            pole_bound: self.pole_bound,
            branch_orders: self.branch_orders.clone(),
        }
    }
}

fn branch_orders_of<S: Scalar>(space: &StalkSubspace<S>) -> Vec<Option<i64>> {
    let window = space.window();
    let mut orders: Vec<Option<i64>> = vec![None; window.branches];
    for v in space.basis() {
        for b in 0..window.branches {
            for e in window.low..window.high {
                if !v[window.index(b, e).unwrap()].is_exactly_zero() {
                    orders[b] = Some(match orders[b] {
                        None => e,
                        Some(cur) => cur.min(e),
                    });
                    break;
                }
            }
        }
    }
    orders
}

/// Builds a divisor stalk equal to the ring itself (trivial divisor).
pub fn trivial_stalk<S: Scalar>(ring: &LocalRingStalk<S>) -> Result<DivisorStalk<S>> {
    DivisorStalk::module_closure(ring, &[ring.ambient().one()])
}

/// Builds the stalk `Obar_q` as a module over the ring.
pub fn full_stalk<S: Scalar>(ring: &LocalRingStalk<S>) -> Result<DivisorStalk<S>> {
    let mut gens: Vec<MultiJet<S>> = Vec::new();
    for b in 0..ring.branches() {
        for k in 0..ring.stability_exponent().max(1) {
            gens.push(ring.ambient().unit(b, k));
        }
    }
    DivisorStalk::module_closure(ring, &gens)
}

/// Tolerance-carrying helper for tests and callers.
pub fn exact_tol() -> Tolerance {
    Tolerance::exact()
}
