//! Endomorphism rings of divisor stalks and the induced partial
//! desingularisations, the two-sheeted `x^2 = y^n` normal form, and
//! spectral (eigenvalue) curves of polynomial matrix families.

use crate::divisor::{DivisorStalk, Freeness};
use crate::error::{Error, Result};
use crate::jet::MultiJet;
use crate::linalg::StalkSubspace;
use crate::localring::{AmbientStalk, LocalRingStalk, MAX_GEN_TRUNC};
use crate::ratfun::{P1Point, Poly, RatFun};
use crate::scalar::Scalar;

/// Result of computing the largest subring acting on a divisor stalk.
#[derive(Clone, Debug)]
pub struct MiddledingResult<S: Scalar> {
    /// The endomorphism ring, certified blockwise.
    pub ring_prime: LocalRingStalk<S>,
    /// Branch partition induced by order-0 separation (the relation R'').
    pub partition: Vec<Vec<usize>>,
    /// The same module, re-certified over the endomorphism ring. Its
    /// subspace equals the input divisor's.
    pub lifted: DivisorStalk<S>,
    /// Freeness verdict of the lift.
    pub freeness: Freeness<S>,
}

/// Computes `{f in Obar : f * g_i in S for all generators}` by one linear
/// solve, certifies it as a (possibly branch-separating) ring stalk, lifts
/// the divisor over it and attaches the freeness verdict.
pub fn endomorphism_ring<S: Scalar>(divisor: &DivisorStalk<S>) -> Result<MiddledingResult<S>> {
    let ring = divisor.ring();
    let tol = ring.tol();
    let window = divisor.window();
    let b = ring.branches();
    let pole = divisor.pole_bound();
    // f lives in [0, f_high); products f * g must be known on the module
    // window, and the closure certificate may need up to 2m + 2 since the
    // endomorphism ring contains the structure ring (so its stability
    // exponent is at most m)
    let f_high = window.high + pole + 2 * ring.stability_exponent() + 4;
    let f_win = crate::linalg::JetWindow::new(b, 0, f_high);
    let phis = divisor.space().complement_functionals();
    let mut rows: Vec<Vec<S>> = Vec::new();
    for g in divisor.generators() {
        // row(f) = phi(f * g); multiplication by g is linear in f's coords
        for phi in &phis {
            let mut row = vec![S::zero(); f_win.dim()];
            for br in 0..b {
                let gj = g.branch(br);
                for fe in 0..f_high {
                    let src = f_win.index(br, fe).unwrap();
                    let mut acc = S::zero();
                    for ge in window.low..window.high {
                        // coefficient of (f*g) at (br, fe + ge') where ge' is
                        // g's exponent: collect via phi
                        let target = fe + ge;
                        let coeff_g = match gj.coeff(target - fe) {
                            Ok(c) => c,
                            Err(_) => continue,
                        };
                        if coeff_g.is_exactly_zero() {
                            continue;
                        }
                        if let Some(dst) = window.index(br, target) {
                            acc = acc.add(&coeff_g.mul(&phi[dst]));
                        }
                    }
                    row[src] = row[src].add(&acc);
                }
            }
            rows.push(row);
        }
    }
    let kernel = crate::linalg::kernel(rows, f_win.dim(), &tol);
    let gens: Vec<MultiJet<S>> = kernel
        .iter()
        .map(|v| f_win.multijet_of(ring.coords(), v))
        .collect();
    let start = AmbientStalk::with_coords(ring.coords().to_vec(), ring.ambient().trunc.min(f_high));
    let ring_prime = LocalRingStalk::subalgebra_closure_split(&start, &gens, &tol)?;
    // sanity: the original ring acts on the divisor, so it must embed
    for rj in ring.space().basis_multijets(ring.coords()) {
        if !ring_prime.contains(&rj)? {
            return Err(Error::Invariant(
                "endomorphism ring does not contain the structure ring".into(),
            ));
        }
    }
    let partition = ring_prime.blocks().to_vec();
    let lifted = DivisorStalk::module_closure_with_pole_bound(
        &ring_prime,
        divisor.generators(),
        divisor.pole_bound(),
    )?;
    // the lift is the same subspace, re-read as a module over ring'
    let common_high = window.high.min(lifted.window().high);
    let lw = crate::linalg::JetWindow::new(b, window.low.min(lifted.window().low), common_high);
    let a = restrict(divisor.space(), lw, &tol)?;
    let c = restrict(lifted.space(), lw, &tol)?;
    if !a.equals(&c) {
        return Err(Error::Invariant(
            "lifted divisor subspace differs from the input divisor".into(),
        ));
    }
    let freeness = lifted.freeness()?;
    Ok(MiddledingResult {
        ring_prime,
        partition,
        lifted,
        freeness,
    })
}

/// Restricts a subspace to a smaller window (drops higher exponents, keeps
/// lower bound coverage).
fn restrict<S: Scalar>(
    space: &StalkSubspace<S>,
    target: crate::linalg::JetWindow,
    tol: &crate::scalar::Tolerance,
) -> Result<StalkSubspace<S>> {
    let src = space.window();
    if target.low < src.low || target.high > src.high {
        return Err(Error::AmbientMismatch(
            "restriction target exceeds the source window".into(),
        ));
    }
    let mut rows = Vec::new();
    for v in space.basis() {
        let mut row = vec![S::zero(); target.dim()];
        for bnum in 0..target.branches {
            for e in target.low..target.high {
                row[target.index(bnum, e).unwrap()] = v[src.index(bnum, e).unwrap()].clone();
            }
        }
        rows.push(row);
    }
    StalkSubspace::span(target, rows, tol)
}

/// The model stalk of `x^2 = y^n`: the ring together with the jets of the
/// coordinates `x` and `y`. Two branches `x = ±y^{n/2}` for even `n`, one
/// branch `y = t^2, x = t^n` for odd `n`.
pub fn an_model<S: Scalar>(
    n: u32,
    tol: &crate::scalar::Tolerance,
) -> Result<(LocalRingStalk<S>, MultiJet<S>, MultiJet<S>)> {
    if n < 1 {
        return Err(Error::Schema("the model x^2 = y^n needs n >= 1".into()));
    }
    if n % 2 == 0 {
        let m = (n / 2) as i64;
        let ambient = AmbientStalk::new(2, (2 * m + 2).max(4));
        let y = MultiJet::new(vec![
            crate::localring::poly_jet("t0", 1, vec![S::one()]),
            crate::localring::poly_jet("t1", 1, vec![S::one()]),
        ])?;
        let x = MultiJet::new(vec![
            crate::localring::poly_jet("t0", m, vec![S::one()]),
            crate::localring::poly_jet("t1", m, vec![S::one().neg()]),
        ])?;
        let ring = LocalRingStalk::subalgebra_closure(&ambient, &[y.clone(), x.clone()], tol)?;
        Ok((ring, x, y))
    } else {
        let ambient = AmbientStalk::new(1, (2 * n as i64 + 2).max(4));
        let y = MultiJet::new(vec![crate::localring::poly_jet("t0", 2, vec![S::one()])])?;
        let x = MultiJet::new(vec![crate::localring::poly_jet(
            "t0",
            n as i64,
            vec![S::one()],
        )])?;
        let ring = LocalRingStalk::subalgebra_closure(&ambient, &[y.clone(), x.clone()], tol)?;
        Ok((ring, x, y))
    }
}

/// Output of the two-sheeted normal-form reduction.
#[derive(Clone, Debug)]
pub struct HyperellipticReduction<S: Scalar> {
    /// Greatest integer with `(x / y^l) f` in the module; 0 when no
    /// antisymmetric correction is needed.
    pub ell: i64,
    /// Certified free generator of the module over the middleding ring.
    pub generator: MultiJet<S>,
    /// Ring generated by `{y, x/y^l}`.
    pub middleding_ring: LocalRingStalk<S>,
}

/// Reduces a divisor stalk on the `x^2 = y^n` model: finds the generator of
/// minimal total branch order, the exponent `l`, and certifies that the
/// module is free over the ring generated by `{y, x/y^l}`.
pub fn hyperelliptic_reduce<S: Scalar>(
    n: u32,
    divisor: &DivisorStalk<S>,
) -> Result<HyperellipticReduction<S>> {
    let tol = divisor.ring().tol();
    let (model_ring, x, y) = an_model::<S>(n, &tol)?;
    // the stalk must live over the declared normal form
    let given = divisor.ring();
    if given.branches() != model_ring.branches() {
        return Err(Error::Schema(
            "divisor stalk is not over the declared x^2 = y^n model".into(),
        ));
    }
    let common = given.ambient().trunc.min(model_ring.ambient().trunc);
    let a = restrict(
        given.space(),
        crate::linalg::JetWindow::new(given.branches(), 0, common),
        &tol,
    )?;
    let b = restrict(
        model_ring.space(),
        crate::linalg::JetWindow::new(given.branches(), 0, common),
        &tol,
    )?;
    if !a.equals(&b) {
        return Err(Error::Schema(
            "divisor stalk is not over the declared x^2 = y^n model".into(),
        ));
    }
    let m = (n / 2) as i64;
    let f = minimal_total_order_element(divisor)?;
    // greatest l in 0..=m with (x/y^l) f in the module
    let mut ell = 0;
    for l in (1..=m).rev() {
        let xl = x_over_y_power(&x, &y, l)?;
        let probe = xl.mul(&f)?;
        if divisor.contains(&probe)? {
            ell = l;
            break;
        }
    }
    let ring_gens = if ell == 0 {
        vec![y.clone(), x.clone()]
    } else {
        vec![y.clone(), x_over_y_power(&x, &y, ell)?]
    };
    let start = AmbientStalk::with_coords(given.coords().to_vec(), given.ambient().trunc);
    let middleding_ring = LocalRingStalk::subalgebra_closure_split(&start, &ring_gens, &tol)?;
    let lifted = DivisorStalk::module_closure_with_pole_bound(
        &middleding_ring,
        divisor.generators(),
        divisor.pole_bound(),
    )?;
    if !lifted.generates(&f.truncate_to(lifted.window().high))? {
        return Err(Error::Invariant(
            "normal-form generator fails to generate over the middleding ring".into(),
        ));
    }
    Ok(HyperellipticReduction {
        ell,
        generator: f,
        middleding_ring,
    })
}

/// `x / y^l` as a multijet (exact monomial division on each branch).
fn x_over_y_power<S: Scalar>(x: &MultiJet<S>, y: &MultiJet<S>, l: i64) -> Result<MultiJet<S>> {
    let mut jets = Vec::new();
    for bidx in 0..x.branch_count() {
        let xb = x.branch(bidx);
        let yb = y.branch(bidx);
        let shift = yb.ord().map(|o| o * l).unwrap_or(0);
        jets.push(xb.shift(-shift));
    }
    MultiJet::new(jets)
}

/// Picks an element of the module attaining the minimal order on every
/// branch simultaneously (the minimizer of the total branch order).
fn minimal_total_order_element<S: Scalar>(divisor: &DivisorStalk<S>) -> Result<MultiJet<S>> {
    let orders = divisor.branch_orders();
    let b = orders.len();
    let targets: Vec<i64> = orders
        .iter()
        .map(|o| o.ok_or_else(|| Error::Invariant("module vanishes on a branch".into())))
        .collect::<Result<Vec<_>>>()?;
    let basis = divisor.space().basis_multijets(divisor.ring().coords());
    let attains = |f: &MultiJet<S>| (0..b).all(|i| f.branch(i).ord() == Some(targets[i]));
    for f in &basis {
        if attains(f) {
            return Ok(f.clone());
        }
    }
    // per-branch minimizers and small integer combinations of them
    let mut minimizers: Vec<MultiJet<S>> = Vec::new();
    for i in 0..b {
        let f = basis
            .iter()
            .filter(|f| f.branch(i).ord() == Some(targets[i]))
            .min_by_key(|f| {
                (0..b)
                    .map(|j| f.branch(j).ord().unwrap_or(i64::MAX / 4))
                    .sum::<i64>()
            })
            .ok_or_else(|| Error::Invariant("no basis element attains the branch order".into()))?;
        minimizers.push(f.clone());
    }
    for c in 1..=(b as i64 * 4) {
        let mut acc = minimizers[0].clone();
        for f in minimizers.iter().skip(1) {
            acc = acc.add(&f.scale(&S::from_int(c)))?;
        }
        if attains(&acc) {
            return Ok(acc);
        }
    }
    Err(Error::Invariant(
        "could not combine branch minimizers into a total-order minimizer".into(),
    ))
}

/// A polynomial matrix family with user-supplied rational eigenvalue
/// branches, a normalising linear form and designated singular parameter
/// values.
#[derive(Clone, Debug)]
pub struct MatrixCurveSpec<S: Scalar> {
    pub matrix: Vec<Vec<Poly<S>>>,
    pub branches: Vec<RatFun<S>>,
    pub linear_form: Vec<S>,
    pub singular_lambdas: Vec<S>,
    pub var: String,
}

/// The eigenvalue curve data: normalised eigenvectors per branch and the
/// divisor stalk at each designated singular parameter value.
#[derive(Clone, Debug)]
pub struct EigenCurve<S: Scalar> {
    pub spec: MatrixCurveSpec<S>,
    /// One eigenvector (n rational functions) per branch.
    pub psi: Vec<Vec<RatFun<S>>>,
    /// Per singular lambda: the ring stalk generated by jets of lambda and
    /// mu, and the divisor stalk generated by the eigenvector entries.
    pub stalks: Vec<EigenStalk<S>>,
}

#[derive(Clone, Debug)]
pub struct EigenStalk<S: Scalar> {
    pub lambda: S,
    pub ring: LocalRingStalk<S>,
    pub divisor: DivisorStalk<S>,
}

/// Gaussian elimination over the rational function field.
fn ratfun_solve<S: Scalar>(a: &[Vec<RatFun<S>>], b: &[RatFun<S>]) -> Result<Option<Vec<RatFun<S>>>> {
    let rows = a.len();
    if rows == 0 {
        return Ok(Some(Vec::new()));
    }
    let cols = a[0].len();
    let mut m: Vec<Vec<RatFun<S>>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut rank = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let Some(prow) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, prow);
        let inv = RatFun::one().div(&m[rank][col].clone())?;
        for c in col..=cols {
            m[rank][c] = m[rank][c].mul(&inv)?;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=cols {
                    let d = f.mul(&m[rank][c])?;
                    m[r][c] = m[r][c].sub(&d)?;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    // consistency
    for r in rank..rows {
        if !m[r][cols].is_zero() {
            return Ok(None);
        }
    }
    let mut x = vec![RatFun::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = m[r][cols].clone();
    }
    Ok(Some(x))
}

fn ratfun_kernel<S: Scalar>(a: &[Vec<RatFun<S>>]) -> Result<Vec<Vec<RatFun<S>>>> {
    let rows = a.len();
    if rows == 0 {
        return Ok(Vec::new());
    }
    let cols = a[0].len();
    let mut m = a.to_vec();
    let mut rank = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let Some(prow) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, prow);
        let inv = RatFun::one().div(&m[rank][col].clone())?;
        for c in 0..cols {
            m[rank][c] = m[rank][c].mul(&inv)?;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..cols {
                    let d = f.mul(&m[rank][c])?;
                    m[r][c] = m[r][c].sub(&d)?;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut out = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![RatFun::zero(); cols];
        v[free] = RatFun::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = m[r][free].neg();
        }
        out.push(v);
    }
    Ok(out)
}

fn mat_mul<S: Scalar>(a: &[Vec<RatFun<S>>], b: &[Vec<RatFun<S>>]) -> Result<Vec<Vec<RatFun<S>>>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let mut out = vec![vec![RatFun::zero(); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = RatFun::zero();
            for l in 0..k {
                acc = acc.add(&a[i][l].mul(&b[l][j])?)?;
            }
            out[i][j] = acc;
        }
    }
    Ok(out)
}

fn mat_inv<S: Scalar>(a: &[Vec<RatFun<S>>]) -> Result<Vec<Vec<RatFun<S>>>> {
    let n = a.len();
    let mut cols_out = Vec::new();
    for j in 0..n {
        let mut e = vec![RatFun::zero(); n];
        e[j] = RatFun::one();
        let x = ratfun_solve(a, &e)?
            .ok_or_else(|| Error::Invariant("singular matrix over the function field".into()))?;
        cols_out.push(x);
    }
    let mut out = vec![vec![RatFun::zero(); n]; n];
    for (j, col) in cols_out.iter().enumerate() {
        for i in 0..n {
            out[i][j] = col[i].clone();
        }
    }
    Ok(out)
}

fn det<S: Scalar>(a: &[Vec<RatFun<S>>]) -> Result<RatFun<S>> {
    let n = a.len();
    let mut m = a.to_vec();
    let mut acc = RatFun::one();
    for col in 0..n {
        let Some(prow) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Ok(RatFun::zero());
        };
        if prow != col {
            m.swap(col, prow);
            acc = acc.neg();
        }
        acc = acc.mul(&m[col][col].clone())?;
        let inv = RatFun::one().div(&m[col][col].clone())?;
        for r in (col + 1)..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].mul(&inv)?;
            for c in col..n {
                let d = f.mul(&m[col][c])?;
                m[r][c] = m[r][c].sub(&d)?;
            }
        }
    }
    Ok(acc)
}

impl<S: Scalar> MatrixCurveSpec<S> {
    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    fn matrix_ratfun(&self) -> Vec<Vec<RatFun<S>>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|p| RatFun::from_poly(p.clone())).collect())
            .collect()
    }

    /// `A - mu * Id` over the function field.
    fn shifted(&self, mu: &RatFun<S>) -> Vec<Vec<RatFun<S>>> {
        let mut m = self.matrix_ratfun();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = row[i].sub(mu).expect("field ops");
        }
        m
    }

    /// Verifies `det(mu Id - A) = 0` exactly for every supplied branch.
    pub fn verify_branches(&self) -> Result<()> {
        for (i, mu) in self.branches.iter().enumerate() {
            let d = det(&self.shifted(mu))?;
            if !d.is_zero() {
                return Err(Error::BranchMismatch(format!(
                    "branch {i}: det(mu Id - A) is not identically zero"
                )));
            }
        }
        Ok(())
    }
}

/// Solves the eigenvector problem exactly on every branch and assembles the
/// stalks at the designated singular parameter values.
pub fn eigen_curve<S: Scalar>(spec: MatrixCurveSpec<S>) -> Result<EigenCurve<S>> {
    spec.verify_branches()?;
    let n = spec.size();
    let tol = crate::scalar::Tolerance::default_rank();
    let mut psi_all = Vec::new();
    for (bi, mu) in spec.branches.iter().enumerate() {
        let shifted = spec.shifted(mu);
        let kern = ratfun_kernel(&shifted)?;
        if kern.len() != 1 {
            return Err(Error::BranchMismatch(format!(
                "branch {bi}: eigenspace has generic dimension {} (expected 1)",
                kern.len()
            )));
        }
        let v = &kern[0];
        let mut ell_v = RatFun::zero();
        for (c, vi) in spec.linear_form.iter().zip(v) {
            ell_v = ell_v.add(&vi.scale(c))?;
        }
        if ell_v.is_zero() {
            return Err(Error::InadmissibleLinearForm(format!(
                "the form annihilates the eigenvector on branch {bi}"
            )));
        }
        let inv = RatFun::one().div(&ell_v)?;
        let psi: Vec<RatFun<S>> = v
            .iter()
            .map(|vi| vi.mul(&inv))
            .collect::<Result<Vec<_>>>()?;
        psi_all.push(psi);
    }
    let mut stalks = Vec::new();
    for lam in &spec.singular_lambdas {
        let point = P1Point::finite(lam.clone());
        let coords: Vec<String> = (0..spec.branches.len()).map(|i| format!("t{i}")).collect();
        // ring stalk: closure of the jets of lambda and mu
        let mut lam_jets = Vec::new();
        let mut mu_jets = Vec::new();
        for (bi, mu) in spec.branches.iter().enumerate() {
            let lam_fun = RatFun::var();
            let lj = lam_fun.expand_at(&point, &coords[bi], MAX_GEN_TRUNC)?;
            let mj = mu.expand_at(&point, &coords[bi], MAX_GEN_TRUNC)?;
            if mj.ord().map_or(false, |o| o < 0) {
                return Err(Error::BranchMismatch(format!(
                    "branch {bi}: eigenvalue has a pole at the singular point"
                )));
            }
            lam_jets.push(lj);
            mu_jets.push(mj);
        }
        let ambient = AmbientStalk::with_coords(coords.clone(), 6);
        let ring = LocalRingStalk::subalgebra_closure(
            &ambient,
            &[MultiJet::new(lam_jets)?, MultiJet::new(mu_jets)?],
            &tol,
        )?;
        // divisor stalk: generated by the eigenvector entries
        let mut gens = Vec::new();
        for j in 0..n {
            let jets = psi_all
                .iter()
                .enumerate()
                .map(|(bi, psi)| psi[j].expand_at(&point, &coords[bi], MAX_GEN_TRUNC))
                .collect::<Result<Vec<_>>>()?;
            gens.push(MultiJet::new(jets)?);
        }
        let divisor = DivisorStalk::module_closure(&ring, &gens)?;
        stalks.push(EigenStalk {
            lambda: lam.clone(),
            ring,
            divisor,
        });
    }
    Ok(EigenCurve {
        spec,
        psi: psi_all,
        stalks,
    })
}

/// Per-check report of the structure morphism `(O_Y)^n -> S'`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PhiReport {
    /// `mu psi = A psi` and `l(psi) = 1` hold identically on every branch.
    pub eigen_equations: bool,
    /// The eigenvectors are independent at a smooth test point.
    pub injective_at_test_point: bool,
    /// `1, mu, .., mu^{n-1}` with holomorphic coefficients span the ring
    /// stalk at every singular point.
    pub weierstrass_spans_ring: bool,
}

impl PhiReport {
    pub fn all_pass(&self) -> bool {
        self.eigen_equations && self.injective_at_test_point && self.weierstrass_spans_ring
    }
}

/// Verifies the three parts of the isomorphism statement in the truncated
/// model. Failures are report entries, not errors.
pub fn phi_check<S: Scalar>(curve: &EigenCurve<S>) -> Result<PhiReport> {
    let spec = &curve.spec;
    let n = spec.size();
    let a = spec.matrix_ratfun();
    // (i) exact eigen equations
    let mut eigen_equations = true;
    'branches: for (bi, mu) in spec.branches.iter().enumerate() {
        let psi = &curve.psi[bi];
        for i in 0..n {
            let mut lhs = RatFun::zero();
            for j in 0..n {
                lhs = lhs.add(&a[i][j].mul(&psi[j])?)?;
            }
            let rhs = mu.mul(&psi[i])?;
            if !lhs.sub(&rhs)?.is_zero() {
                eigen_equations = false;
                break 'branches;
            }
        }
        let mut ell = RatFun::zero();
        for (c, p) in spec.linear_form.iter().zip(psi) {
            ell = ell.add(&p.scale(c))?;
        }
        if !ell.sub(&RatFun::one())?.is_zero() {
            eigen_equations = false;
            break 'branches;
        }
    }
    // (ii) injectivity at a smooth test point
    let mut injective = false;
    'test: for cand in 1..=20i64 {
        let lam = S::from_int(cand);
        if spec
            .singular_lambdas
            .iter()
            .any(|s| s.sub(&lam).is_exactly_zero())
        {
            continue;
        }
        let mut cols = Vec::new();
        for psi in &curve.psi {
            let mut col = Vec::new();
            for p in psi {
                match p.eval(&lam) {
                    Ok(v) => col.push(RatFun::constant(v)),
                    Err(_) => continue 'test,
                }
            }
            cols.push(col);
        }
        // matrix with columns = eigenvectors
        let mut m = vec![vec![RatFun::zero(); cols.len()]; n];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                m[i][j] = col[i].clone();
            }
        }
        if m.len() == cols.len() {
            if let Ok(d) = det(&m) {
                if !d.is_zero() {
                    injective = true;
                }
            }
        }
        break;
    }
    // (iii) Weierstrass span at every singular stalk
    let mut spans = true;
    for stalk in &curve.stalks {
        let window = stalk.ring.window();
        let point = P1Point::finite(stalk.lambda.clone());
        let coords = stalk.ring.coords();
        let tol = stalk.ring.tol();
        let mut rows = Vec::new();
        // lambda^a * mu^b for a in 0..high, b in 0..n
        let mut mu_pows: Vec<MultiJet<S>> = Vec::new();
        let mut mu_jet_branches = Vec::new();
        for (bi, mu) in spec.branches.iter().enumerate() {
            mu_jet_branches.push(mu.expand_at(&point, &coords[bi], window.high + 2)?);
        }
        let mu_jet = MultiJet::new(mu_jet_branches)?;
        let mut pow = MultiJet::constant(coords, S::one(), window.high + 2);
        for _ in 0..n {
            mu_pows.push(pow.clone());
            pow = pow.mul(&mu_jet)?;
        }
        let lam_jet = {
            let lam_fun = RatFun::<S>::var();
            let jets = (0..spec.branches.len())
                .map(|bi| lam_fun.expand_at(&point, &coords[bi], window.high + 2))
                .collect::<Result<Vec<_>>>()?;
            MultiJet::new(jets)?
        };
        for mp in &mu_pows {
            let mut shifted = mp.clone();
            for _a in 0..window.high {
                rows.push(window.vector_of(&shifted.truncate_to(window.high))?);
                shifted = shifted.mul(&lam_jet)?;
            }
        }
        let span = StalkSubspace::span(window, rows, &tol)?;
        if !span.equals(stalk.ring.space()) {
            spans = false;
        }
    }
    Ok(PhiReport {
        eigen_equations,
        injective_at_test_point: injective,
        weierstrass_spans_ring: spans,
    })
}

/// Builds the matrix `B` acting as multiplication by `nu` in the eigenvector
/// basis: `B psi^{(i)} = nu_i psi^{(i)}` for every branch.
pub struct CommutantResult<S: Scalar> {
    pub matrix: Vec<Vec<RatFun<S>>>,
    /// Entries are polynomial (holomorphic on the parameter line).
    pub polynomial: bool,
    /// `[A, B] = 0` verified exactly.
    pub commutes: bool,
}

pub fn commutant_matrix<S: Scalar>(
    curve: &EigenCurve<S>,
    nu: &[RatFun<S>],
) -> Result<CommutantResult<S>> {
    let spec = &curve.spec;
    let n = spec.size();
    if nu.len() != curve.psi.len() {
        return Err(Error::Schema(
            "one eigenvalue function per branch is required".into(),
        ));
    }
    // Psi columns are the branch eigenvectors
    let mut psi_mat = vec![vec![RatFun::zero(); curve.psi.len()]; n];
    for (j, psi) in curve.psi.iter().enumerate() {
        for i in 0..n {
            psi_mat[i][j] = psi[i].clone();
        }
    }
    if curve.psi.len() != n {
        return Err(Error::Schema(
            "the commutant construction needs as many branches as matrix rows".into(),
        ));
    }
    let inv = mat_inv(&psi_mat)?;
    let mut diag = vec![vec![RatFun::zero(); n]; n];
    for (i, nui) in nu.iter().enumerate() {
        diag[i][i] = nui.clone();
    }
    let b = mat_mul(&mat_mul(&psi_mat, &diag)?, &inv)?;
    let polynomial = b.iter().flatten().all(|e| e.is_polynomial() || e.is_zero());
    let a = spec.matrix_ratfun();
    let ab = mat_mul(&a, &b)?;
    let ba = mat_mul(&b, &a)?;
    let mut commutes = true;
    'outer: for i in 0..n {
        for j in 0..n {
            if !ab[i][j].sub(&ba[i][j])?.is_zero() {
                commutes = false;
                break 'outer;
            }
        }
    }
    Ok(CommutantResult {
        matrix: b,
        polynomial,
        commutes,
    })
}

/// Inverse direction: eigenvalue functions of a commuting matrix and their
/// membership in the endomorphism (middleding) rings at the singular points.
pub struct EigenvalueCheck<S: Scalar> {
    pub commutes: bool,
    pub eigenvalues: Vec<RatFun<S>>,
    /// Per singular point: does the eigenvalue multijet lie in the
    /// endomorphism ring of the eigen divisor stalk?
    pub middleding_membership: Vec<bool>,
}

pub fn eigenvalue_check<S: Scalar>(
    curve: &EigenCurve<S>,
    b: &[Vec<RatFun<S>>],
) -> Result<EigenvalueCheck<S>> {
    let spec = &curve.spec;
    let n = spec.size();
    let a = spec.matrix_ratfun();
    let ab = mat_mul(&a, b)?;
    let ba = mat_mul(b, &a)?;
    let mut commutes = true;
    'outer: for i in 0..n {
        for j in 0..n {
            if !ab[i][j].sub(&ba[i][j])?.is_zero() {
                commutes = false;
                break 'outer;
            }
        }
    }
    // nu_i = l(B psi^(i)) since l(psi) = 1
    let mut eigenvalues = Vec::new();
    for psi in &curve.psi {
        let mut bpsi = vec![RatFun::zero(); n];
        for i in 0..n {
            for j in 0..n {
                bpsi[i] = bpsi[i].add(&b[i][j].mul(&psi[j])?)?;
            }
        }
        let mut nu = RatFun::zero();
        for (c, v) in spec.linear_form.iter().zip(&bpsi) {
            nu = nu.add(&v.scale(c))?;
        }
        eigenvalues.push(nu);
    }
    let mut membership = Vec::new();
    for stalk in &curve.stalks {
        let md = endomorphism_ring(&stalk.divisor)?;
        let point = P1Point::finite(stalk.lambda.clone());
        let coords = stalk.ring.coords();
        let jets = eigenvalues
            .iter()
            .enumerate()
            .map(|(bi, nu)| nu.expand_at(&point, &coords[bi], md.ring_prime.window().high))
            .collect::<Result<Vec<_>>>()?;
        let jet = MultiJet::new(jets)?;
        let ok = jet.ord().map_or(true, |o| o >= 0) && md.ring_prime.contains(&jet)?;
        membership.push(ok);
    }
    Ok(EigenvalueCheck {
        commutes,
        eigenvalues,
        middleding_membership: membership,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::{full_stalk, trivial_stalk};
    use crate::localring::poly_jet;
    use crate::parse::parse_ratfun;
    use crate::scalar::{ExactScalar, Tolerance};

    fn tol() -> Tolerance {
        Tolerance::exact()
    }

    fn int(n: i64) -> ExactScalar {
        ExactScalar::from_int(n)
    }

    fn cusp_ring() -> LocalRingStalk<ExactScalar> {
        LocalRingStalk::from_divisor(&[2], None, &tol()).unwrap()
    }

    /// The 3x3 family A = [[l,0,a],[0,0,b],[0,0,-l]] with a = b = 1.
    fn triple_spec() -> MatrixCurveSpec<ExactScalar> {
        let p = |s: &str| crate::parse::parse_poly::<ExactScalar>(s, "lambda").unwrap();
        MatrixCurveSpec {
            matrix: vec![
                vec![p("lambda"), p("0"), p("1")],
                vec![p("0"), p("0"), p("1")],
                vec![p("0"), p("0"), p("-lambda")],
            ],
            branches: vec![
                parse_ratfun("lambda", "lambda").unwrap(),
                parse_ratfun("0", "lambda").unwrap(),
                parse_ratfun("-lambda", "lambda").unwrap(),
            ],
            linear_form: vec![int(1), int(1), int(1)],
            singular_lambdas: vec![int(0)],
            var: "lambda".into(),
        }
    }

    #[test]
    fn cusp_obar_middleding_is_normalisation() {
        let ring = cusp_ring();
        let obar = full_stalk(&ring).unwrap();
        let md = endomorphism_ring(&obar).unwrap();
        assert!(md.ring_prime.is_full());
        assert_eq!(md.ring_prime.delta(), 0);
        assert!(md.freeness.is_free());
    }

    #[test]
    fn cusp_free_divisor_middleding_is_the_cusp_itself() {
        let ring = cusp_ring();
        let g = MultiJet::new(vec![poly_jet("t0", -1, vec![int(1)])]).unwrap();
        let s = DivisorStalk::module_closure(&ring, &[g]).unwrap();
        let md = endomorphism_ring(&s).unwrap();
        assert_eq!(md.ring_prime.delta(), 1);
        assert_eq!(md.ring_prime.stability_exponent(), 2);
        assert!(md.freeness.is_free());
        // idempotence: middleding of the lift is itself
        let again = endomorphism_ring(&md.lifted).unwrap();
        assert_eq!(again.ring_prime.space().dim(), md.ring_prime.space().dim());
        assert!(again.ring_prime.space().equals(md.ring_prime.space()));
    }

    #[test]
    fn locally_free_implies_middleding_equals_ring() {
        let ring = LocalRingStalk::<ExactScalar>::from_divisor(&[1, 1], None, &tol()).unwrap();
        let g = MultiJet::new(vec![
            poly_jet("t0", -1, vec![int(1)]),
            poly_jet("t1", 0, vec![int(1)]),
        ])
        .unwrap();
        let s = DivisorStalk::module_closure(&ring, &[g]).unwrap();
        assert!(s.freeness().unwrap().is_free());
        let md = endomorphism_ring(&s).unwrap();
        let ring_resized = ring.rebuild(md.ring_prime.ambient().trunc).unwrap();
        assert!(md.ring_prime.space().equals(ring_resized.space()));
    }

    #[test]
    fn delta_additivity_along_partial_desingularisation() {
        let ring = cusp_ring();
        let obar = full_stalk(&ring).unwrap();
        let md = endomorphism_ring(&obar).unwrap();
        let drop = ring
            .rebuild(md.ring_prime.ambient().trunc)
            .unwrap();
        let quotient = md
            .ring_prime
            .space()
            .quotient_dim(drop.space())
            .unwrap();
        assert_eq!(ring.delta(), md.ring_prime.delta() + quotient);
    }

    #[test]
    fn triple_point_eigenvectors_match_closed_forms() {
        let curve = eigen_curve(triple_spec()).unwrap();
        // branch mu = lambda: psi = (1,0,0)
        assert_eq!(curve.psi[0][0], RatFun::one());
        assert!(curve.psi[0][1].is_zero());
        assert!(curve.psi[0][2].is_zero());
        // branch mu = 0: psi = (0,1,0)
        assert!(curve.psi[1][0].is_zero());
        assert_eq!(curve.psi[1][1], RatFun::one());
        assert!(curve.psi[1][2].is_zero());
        // branch mu = -lambda: psi = (-1,-2,2 lambda)/(2 lambda - 3)
        let expect = |s: &str| parse_ratfun::<ExactScalar>(s, "lambda").unwrap();
        assert_eq!(curve.psi[2][0], expect("-1/(2*lambda-3)"));
        assert_eq!(curve.psi[2][1], expect("-2/(2*lambda-3)"));
        assert_eq!(curve.psi[2][2], expect("2*lambda/(2*lambda-3)"));
        // pole of psi at lambda = 3/2 = (a+2b)/2
        let pole = ExactScalar::from_ratio(3, 2);
        assert!(curve.psi[2][2].eval(&pole).is_err());
    }

    #[test]
    fn triple_point_middleding_ring_and_value_rank() {
        let curve = eigen_curve(triple_spec()).unwrap();
        let stalk = &curve.stalks[0];
        assert_eq!(stalk.ring.delta(), 3);
        let md = endomorphism_ring(&stalk.divisor).unwrap();
        // middleding ring = closure of jets of {lambda, mu, mu^2/lambda}
        let coords = stalk.ring.coords().to_vec();
        let lam = MultiJet::new(vec![
            poly_jet(&coords[0], 1, vec![int(1)]),
            poly_jet(&coords[1], 1, vec![int(1)]),
            poly_jet(&coords[2], 1, vec![int(1)]),
        ])
        .unwrap();
        let mu = MultiJet::new(vec![
            poly_jet(&coords[0], 1, vec![int(1)]),
            crate::jet::LaurentJet::zero(&coords[1], MAX_GEN_TRUNC),
            poly_jet(&coords[2], 1, vec![int(-1)]),
        ])
        .unwrap();
        let mu2_over_lambda = MultiJet::new(vec![
            poly_jet(&coords[0], 1, vec![int(1)]),
            crate::jet::LaurentJet::zero(&coords[1], MAX_GEN_TRUNC),
            poly_jet(&coords[2], 1, vec![int(1)]),
        ])
        .unwrap();
        let ambient = AmbientStalk::with_coords(coords, md.ring_prime.ambient().trunc);
        let expected = LocalRingStalk::subalgebra_closure(
            &ambient,
            &[lam, mu, mu2_over_lambda],
            &tol(),
        )
        .unwrap();
        assert!(md.ring_prime.space().equals(expected.space()));
        assert_eq!(md.ring_prime.delta(), 2);
        // lifted divisor is not free: value rank 2
        assert!(md.freeness.certified_not_free());
        // evaluation rank of the stalk is 2
        assert_eq!(stalk.divisor.preimage_value_rank().unwrap(), 2);
    }

    #[test]
    fn phi_checks_pass_on_the_triple_point_and_diagonal_families() {
        let curve = eigen_curve(triple_spec()).unwrap();
        let report = phi_check(&curve).unwrap();
        assert!(report.all_pass(), "{report:?}");

        // diagonal family diag(lambda, 2 lambda)
        let p = |s: &str| crate::parse::parse_poly::<ExactScalar>(s, "lambda").unwrap();
        let spec = MatrixCurveSpec {
            matrix: vec![vec![p("lambda"), p("0")], vec![p("0"), p("2*lambda")]],
            branches: vec![
                parse_ratfun("lambda", "lambda").unwrap(),
                parse_ratfun("2*lambda", "lambda").unwrap(),
            ],
            linear_form: vec![int(1), int(1)],
            singular_lambdas: vec![int(0)],
            var: "lambda".into(),
        };
        let curve = eigen_curve(spec).unwrap();
        let report = phi_check(&curve).unwrap();
        assert!(report.all_pass(), "{report:?}");

        // duplicated branch: injectivity fails as a report entry
        let spec = MatrixCurveSpec {
            matrix: vec![vec![p("lambda"), p("0")], vec![p("0"), p("lambda")]],
            branches: vec![
                parse_ratfun("lambda", "lambda").unwrap(),
                parse_ratfun("lambda", "lambda").unwrap(),
            ],
            linear_form: vec![int(1), int(0)],
            singular_lambdas: vec![],
            var: "lambda".into(),
        };
        match eigen_curve(spec) {
            Ok(curve) => {
                let report = phi_check(&curve).unwrap();
                assert!(!report.injective_at_test_point);
            }
            Err(Error::BranchMismatch(_)) | Err(Error::InadmissibleLinearForm(_)) => {}
            Err(e) => panic!("unexpected: {e}"),
        }
    }

    #[test]
    fn commutant_of_mu_squared_over_lambda() {
        let curve = eigen_curve(triple_spec()).unwrap();
        let nu = vec![
            parse_ratfun::<ExactScalar>("lambda", "lambda").unwrap(),
            parse_ratfun("0", "lambda").unwrap(),
            parse_ratfun("lambda", "lambda").unwrap(),
        ];
        let res = commutant_matrix(&curve, &nu).unwrap();
        assert!(res.polynomial);
        assert!(res.commutes);
        // B = [[l,0,0],[0,0,-1],[0,0,l]] for a = b = 1
        let expect = |s: &str| parse_ratfun::<ExactScalar>(s, "lambda").unwrap();
        assert_eq!(res.matrix[0][0], expect("lambda"));
        assert_eq!(res.matrix[1][2], expect("-1"));
        assert_eq!(res.matrix[2][2], expect("lambda"));
        assert!(res.matrix[0][1].is_zero());
        assert!(res.matrix[0][2].is_zero());
        assert!(res.matrix[1][0].is_zero());
        assert!(res.matrix[1][1].is_zero());
        assert!(res.matrix[2][0].is_zero());
        assert!(res.matrix[2][1].is_zero());

        // nu = mu gives back A
        let nu_mu = curve.spec.branches.clone();
        let res = commutant_matrix(&curve, &nu_mu).unwrap();
        assert!(res.polynomial && res.commutes);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(
                    res.matrix[i][j],
                    RatFun::from_poly(curve.spec.matrix[i][j].clone())
                );
            }
        }

        // nu = mu / lambda is not in the middleding ring: non-polynomial
        let over = |s: &str| parse_ratfun::<ExactScalar>(s, "lambda").unwrap();
        let nu_bad = vec![over("1"), over("0"), over("-1")];
        let res = commutant_matrix(&curve, &nu_bad).unwrap();
        assert!(!res.polynomial);
        assert!(res.commutes);
    }

    #[test]
    fn eigenvalue_check_both_directions() {
        let curve = eigen_curve(triple_spec()).unwrap();
        // B = A^2 / lambda, a polynomial commuting matrix
        let e = |s: &str| parse_ratfun::<ExactScalar>(s, "lambda").unwrap();
        let b = vec![
            vec![e("lambda"), e("0"), e("0")],
            vec![e("0"), e("0"), e("-1")],
            vec![e("0"), e("0"), e("lambda")],
        ];
        let check = eigenvalue_check(&curve, &b).unwrap();
        assert!(check.commutes);
        assert_eq!(check.eigenvalues[0], e("lambda"));
        assert_eq!(check.eigenvalues[1], e("0"));
        assert_eq!(check.eigenvalues[2], e("lambda"));
        assert!(check.middleding_membership.iter().all(|&x| x));

        // B = A / lambda commutes but its eigenvalue mu/lambda is not in the ring
        let b = vec![
            vec![e("1"), e("0"), e("1/lambda")],
            vec![e("0"), e("0"), e("1/lambda")],
            vec![e("0"), e("0"), e("-1")],
        ];
        let check = eigenvalue_check(&curve, &b).unwrap();
        assert!(check.commutes);
        assert!(!check.middleding_membership[0]);
    }

    #[test]
    fn hyperelliptic_cusp_reduces_to_normalisation() {
        // n = 3 (cusp), divisor = Obar: l = 1, ring gens {t^2, t}, f = 1
        let (ring, _x, _y) = an_model::<ExactScalar>(3, &tol()).unwrap();
        let obar = full_stalk(&ring).unwrap();
        let red = hyperelliptic_reduce(3, &obar).unwrap();
        assert_eq!(red.ell, 1);
        assert!(red.middleding_ring.is_full());
        assert_eq!(red.generator.branch(0).ord(), Some(0));
        // matches the endomorphism ring computation
        let md = endomorphism_ring(&obar).unwrap();
        assert_eq!(md.ring_prime.delta(), red.middleding_ring.delta());
    }

    #[test]
    fn hyperelliptic_node_trivial_divisor_keeps_the_ring() {
        // n = 2 (node), divisor = ring: l = 0, middleding = same ring
        let (ring, _x, _y) = an_model::<ExactScalar>(2, &tol()).unwrap();
        let triv = trivial_stalk(&ring).unwrap();
        let red = hyperelliptic_reduce(2, &triv).unwrap();
        assert_eq!(red.ell, 0);
        assert_eq!(red.middleding_ring.delta(), ring.delta());
        assert!(red.middleding_ring.space().equals(ring.space()));
    }

    #[test]
    fn tacnode_reductions() {
        let (ring, x, y) = an_model::<ExactScalar>(4, &tol()).unwrap();
        assert_eq!(ring.delta(), 2);
        // divisor = Obar: l = 2, ring {y, x/y^2} generates the normalisation
        let obar = full_stalk(&ring).unwrap();
        let red = hyperelliptic_reduce(4, &obar).unwrap();
        assert_eq!(red.ell, 2);
        assert!(red.middleding_ring.is_full());
        // divisor generated by {1, x/y}: l = 1, middleding ring {y, x/y}
        // is the node (delta drops 2 -> 1)
        let xy = x_over_y_power(&x, &y, 1).unwrap();
        let s = DivisorStalk::module_closure(&ring, &[ring.ambient().one(), xy]).unwrap();
        let red = hyperelliptic_reduce(4, &s).unwrap();
        assert_eq!(red.ell, 1);
        assert_eq!(red.middleding_ring.delta(), 1);
        let node = LocalRingStalk::<ExactScalar>::from_divisor(
            &[1, 1],
            Some(red.middleding_ring.ambient().trunc),
            &tol(),
        )
        .unwrap();
        assert!(red.middleding_ring.space().equals(node.space()));
    }

    #[test]
    fn eigen_divisor_class_independent_of_the_linear_form() {
        // two admissible forms give stalks of the same degree
        let curve1 = eigen_curve(triple_spec()).unwrap();
        let mut spec2 = triple_spec();
        spec2.linear_form = vec![int(1), int(2), int(1)];
        let curve2 = eigen_curve(spec2).unwrap();
        assert_eq!(
            curve1.stalks[0].divisor.degree().unwrap(),
            curve2.stalks[0].divisor.degree().unwrap()
        );
        // total pole degree of the eigenvectors matches as well
        let pole_sum = |c: &EigenCurve<ExactScalar>| -> i64 {
            c.psi
                .iter()
                .flatten()
                .map(|f| f.den().degree().unwrap_or(0) as i64)
                .sum()
        };
        assert_eq!(pole_sum(&curve1), pole_sum(&curve2));
    }

    #[test]
    fn normal_form_reduction_agrees_with_the_endomorphism_ring() {
        // two independent routes to the middleding on x^2 = y^n models:
        // the {y, x/y^l} normal form versus the kernel computation
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::DEFAULT_SEED ^ 31);
        for _ in 0..10 {
            let n = rng.gen_range(2..=6u32);
            let (ring, _x, _y) = an_model::<ExactScalar>(n, &tol()).unwrap();
            let b = ring.branches();
            let gen = MultiJet::new(
                (0..b)
                    .map(|i| {
                        poly_jet(&format!("t{i}"), rng.gen_range(-2i64..=1), vec![int(1)])
                    })
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let s = DivisorStalk::module_closure(&ring, &[gen]).unwrap();
            let red = hyperelliptic_reduce(n, &s).unwrap();
            let md = endomorphism_ring(&s).unwrap();
            assert_eq!(
                red.middleding_ring.delta(),
                md.ring_prime.delta(),
                "n = {n}"
            );
            let common = red
                .middleding_ring
                .ambient()
                .trunc
                .min(md.ring_prime.ambient().trunc);
            let w = crate::linalg::JetWindow::new(b, 0, common);
            let a = restrict(red.middleding_ring.space(), w, &tol()).unwrap();
            let c = restrict(md.ring_prime.space(), w, &tol()).unwrap();
            assert!(a.equals(&c), "n = {n}: the two middledings differ");
        }
    }

    #[test]
    fn random_divisors_on_two_sheeted_models_lift_freely() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::DEFAULT_SEED ^ 2);
        for _ in 0..20 {
            let n = rng.gen_range(2..=8u32);
            let (ring, _x, _y) = an_model::<ExactScalar>(n, &tol()).unwrap();
            let b = ring.branches();
            let mut gens = Vec::new();
            // one generator that is a unit power on every branch
            let unit = MultiJet::new(
                (0..b)
                    .map(|i| poly_jet(&format!("t{i}"), rng.gen_range(-2i64..=1), vec![int(1)]))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            gens.push(unit);
            for _ in 0..rng.gen_range(0..=1) {
                let jets: Vec<_> = (0..b)
                    .map(|i| {
                        let coeffs: Vec<ExactScalar> =
                            (0..3).map(|_| int(rng.gen_range(-2..=2))).collect();
                        poly_jet(&format!("t{i}"), rng.gen_range(-2i64..=1), coeffs)
                    })
                    .collect();
                gens.push(MultiJet::new(jets).unwrap());
            }
            let s = DivisorStalk::module_closure(&ring, &gens).unwrap();
            let md = endomorphism_ring(&s).unwrap();
            assert!(
                md.freeness.is_free(),
                "n = {n}: lift must be free on a two-sheeted model, got {}",
                md.freeness.describe()
            );
        }
    }
}
