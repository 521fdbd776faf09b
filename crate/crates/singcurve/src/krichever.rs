//! Mittag-Leffler distributions, the residue pairing against global regular
//! forms, and the trivial/periodic classification of line-bundle flows.
//!
//! Germs are rational: the contour-integral splitting becomes exact partial
//! fractions. Periodicity is decided through branch gaps of a primitive on
//! the normalisation, which is the honest cycle lattice for curves whose
//! singularities are ordinary multiple points.

use serde::Serialize;

use crate::curve::{
    h0_forms, omega_divisor, residue_pairing_global, GeneralisedDivisor, RationalSingularCurve,
};
use crate::error::{Error, Result};
use crate::localring::RingRecipe;
use crate::ratfun::{P1Point, Poly, RatFun};
use crate::scalar::{ExactScalar, Scalar, Tolerance};

/// Finite principal part at one marked point: coefficients of
/// `z^-1, z^-2, ..., z^-d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalPart<S: Scalar> {
    coeffs: Vec<S>,
}

impl<S: Scalar> PrincipalPart<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while matches!(coeffs.last(), Some(c) if c.is_exactly_zero()) {
            coeffs.pop();
        }
        PrincipalPart { coeffs }
    }

    pub fn zero() -> Self {
        PrincipalPart { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Pole depth `d`.
    pub fn depth(&self) -> i64 {
        self.coeffs.len() as i64
    }

    /// Coefficient of `z^-j` (1-based).
    pub fn coeff(&self, j: usize) -> S {
        self.coeffs.get(j - 1).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn scale(&self, s: &S) -> Self {
        PrincipalPart::new(self.coeffs.iter().map(|c| c.mul(s)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        PrincipalPart::new(
            (1..=n)
                .map(|j| self.coeff(j).add(&other.coeff(j)))
                .collect(),
        )
    }
}

/// `sum c_j / (w - p)^j`, or the polynomial `sum c_j w^j` at infinity.
pub fn principal_part_ratfun<S: Scalar>(
    part: &PrincipalPart<S>,
    at: &P1Point<S>,
) -> Result<RatFun<S>> {
    let mut acc = RatFun::zero();
    for (idx, c) in part.coeffs.iter().enumerate() {
        let j = idx + 1;
        if c.is_exactly_zero() {
            continue;
        }
        let term = match at {
            P1Point::Finite(v) => {
                let lin = Poly::new(vec![v.neg(), S::one()]);
                let mut den = Poly::one();
                for _ in 0..j {
                    den = den.mul(&lin);
                }
                RatFun::new(Poly::constant(c.clone()), den)?
            }
            P1Point::Infinity => RatFun::from_poly(Poly::monomial(j, c.clone())),
        };
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Splits a rational germ at 0 into `h_plus` (holomorphic at 0) and
/// `h_minus` (pole part, vanishing at infinity).
pub fn birkhoff_split<S: Scalar>(h: &RatFun<S>) -> Result<(RatFun<S>, PrincipalPart<S>)> {
    let origin = P1Point::finite(S::zero());
    let ord = h.order_at(&origin).unwrap_or(0);
    if ord >= 0 {
        return Ok((h.clone(), PrincipalPart::zero()));
    }
    let jet = h.expand_at(&origin, "z", 0)?;
    let depth = -ord;
    let mut coeffs = Vec::with_capacity(depth as usize);
    for j in 1..=depth {
        coeffs.push(jet.coeff(-j)?);
    }
    let part = PrincipalPart::new(coeffs);
    let minus = principal_part_ratfun(&part, &origin)?;
    let plus = h.sub(&minus)?;
    Ok((plus, part))
}

/// Prescribed principal parts at distinct smooth marked points.
#[derive(Clone, Debug)]
pub struct MlDistribution<S: Scalar> {
    /// Point ids on the curve; must be smooth and pairwise distinct.
    pub marked: Vec<usize>,
    pub parts: Vec<PrincipalPart<S>>,
}

impl<S: Scalar> MlDistribution<S> {
    pub fn new(marked: Vec<usize>, parts: Vec<PrincipalPart<S>>) -> Result<Self> {
        if marked.len() != parts.len() {
            return Err(Error::Schema(
                "one principal part per marked point is required".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &m in &marked {
            if !seen.insert(m) {
                return Err(Error::Schema("marked points must be distinct".into()));
            }
        }
        Ok(MlDistribution { marked, parts })
    }

    pub fn validate(&self, curve: &RationalSingularCurve<S>) -> Result<()> {
        for &m in &self.marked {
            if m >= curve.points.len() {
                return Err(Error::Schema("marked point is missing".into()));
            }
            if curve.is_singular_preimage(m) {
                return Err(Error::MalformedPoint(format!(
                    "marked point `{}` is not smooth",
                    curve.points[m].name
                )));
            }
        }
        Ok(())
    }

    pub fn scale(&self, s: &S) -> Self {
        MlDistribution {
            marked: self.marked.clone(),
            parts: self.parts.iter().map(|p| p.scale(s)).collect(),
        }
    }
}

/// Pairs the distribution against every basis regular form; the class
/// vanishes iff all entries vanish.
pub fn ml_pair_all<S: Scalar>(
    curve: &RationalSingularCurve<S>,
    dist: &MlDistribution<S>,
) -> Result<Vec<S>> {
    dist.validate(curve)?;
    let fdiv = omega_divisor(curve, &GeneralisedDivisor::trivial())?;
    let forms = h0_forms(curve, &fdiv)?;
    let marked: Vec<(usize, Vec<S>)> = dist
        .marked
        .iter()
        .zip(&dist.parts)
        .map(|(&m, p)| (m, p.coeffs.clone()))
        .collect();
    forms
        .functions
        .iter()
        .map(|form| residue_pairing_global(curve, &marked, form))
        .collect()
}

/// Solves the distribution by a global meromorphic function on the curve,
/// or returns `None` when the class is non-trivial. The result satisfies
/// every singular-stalk condition and carries exactly the prescribed
/// principal parts.
pub fn ml_solve<S: Scalar>(
    curve: &RationalSingularCurve<S>,
    dist: &MlDistribution<S>,
) -> Result<Option<Vec<RatFun<S>>>> {
    dist.validate(curve)?;
    let tol = curve
        .singularities
        .first()
        .map(|s| s.ring.tol())
        .unwrap_or_default();
    let mut allow = std::collections::BTreeMap::new();
    for (&m, p) in dist.marked.iter().zip(&dist.parts) {
        if p.depth() > 0 {
            allow.insert(m, p.depth());
        }
    }
    let candidates = crate::curve::candidate_basis(curve, &allow);
    // homogeneous rows: stalk membership at every singularity
    let mut rows: Vec<Vec<S>> = Vec::new();
    let mut rhs: Vec<S> = Vec::new();
    for sing in &curve.singularities {
        let space = sing.ring.space();
        let r = crate::curve::stalk_membership_rows(curve, sing, space, &candidates)?;
        for row in r {
            rows.push(row);
            rhs.push(S::zero());
        }
    }
    // inhomogeneous rows: principal part matching at the marked points
    for (&m, part) in dist.marked.iter().zip(&dist.parts) {
        let p = &curve.points[m];
        let depth = part.depth();
        let mut jets = Vec::with_capacity(candidates.len());
        for cand in &candidates {
            let jet = if cand.component == p.component {
                cand.fun.expand_at(&p.at, "z", 1)?
            } else {
                crate::jet::LaurentJet::zero("z", 1)
            };
            jets.push(jet);
        }
        for j in 1..=depth.max(0) {
            rows.push(
                jets.iter()
                    .map(|jet| jet.coeff(-j).unwrap_or_else(|_| S::zero()))
                    .collect(),
            );
            rhs.push(part.coeff(j as usize));
        }
        // also kill any deeper stray coefficients the candidates could carry
        // (cannot happen with the partial-fraction basis, kept for safety)
    }
    match crate::linalg::solve(&rows, &rhs, &tol) {
        Some(x) => {
            let mut tuple = vec![RatFun::zero(); curve.components.len()];
            for (c, cand) in x.iter().zip(&candidates) {
                if c.is_exactly_zero() {
                    continue;
                }
                tuple[cand.component] = tuple[cand.component].add(&cand.fun.scale(c))?;
            }
            // verification by re-expansion
            for (&m, part) in dist.marked.iter().zip(&dist.parts) {
                let p = &curve.points[m];
                let jet = tuple[p.component].expand_at(&p.at, "z", 0)?;
                for j in 1..=part.depth() {
                    let got = jet.coeff(-j)?;
                    if !got.sub(&part.coeff(j as usize)).is_zero(&tol) {
                        return Err(Error::Invariant(
                            "solution fails to reproduce its principal parts".into(),
                        ));
                    }
                }
            }
            Ok(Some(tuple))
        }
        None => Ok(None),
    }
}

/// Verdict of the flow classification at a tested period.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum FlowClass {
    /// The Mittag-Leffler distribution is solvable: the whole flow is
    /// constant at the trivial bundle.
    Trivial,
    /// The bundle returns to the trivial one at the tested period.
    Periodic,
    /// No lattice relation within the tested tolerance.
    AperiodicOnBudget,
}

/// Flow classification data: the class, the cycle gaps of the primitive,
/// and the tested period.
#[derive(Clone, Debug)]
pub struct FlowReport<S: Scalar> {
    pub class: FlowClass,
    /// Cycle-adjusted branch gaps of the primitive `k`.
    pub gaps: Vec<S>,
}

fn require_nodal<S: Scalar>(curve: &RationalSingularCurve<S>) -> Result<()> {
    for s in &curve.singularities {
        match s.ring.recipe() {
            RingRecipe::FromDivisor(mults) if mults.iter().all(|&m| m == 1) => {}
            RingRecipe::Full => {}
            _ => {
                return Err(Error::Unsupported(format!(
                    "periodicity needs ordinary multiple points; singularity `{}` is not one",
                    s.name
                )))
            }
        }
    }
    Ok(())
}

/// The primitive `k` on the normalisation: per component the sum of the
/// pulled-back principal parts.
fn primitive_on_normalisation<S: Scalar>(
    curve: &RationalSingularCurve<S>,
    dist: &MlDistribution<S>,
) -> Result<Vec<RatFun<S>>> {
    let mut k = vec![RatFun::zero(); curve.components.len()];
    for (&m, part) in dist.marked.iter().zip(&dist.parts) {
        let p = &curve.points[m];
        let f = principal_part_ratfun(part, &p.at)?;
        k[p.component] = k[p.component].add(&f)?;
    }
    Ok(k)
}

/// Cycle-adjusted gaps of the primitive across the glued points: constants
/// per component are chosen along a spanning tree, the residual gaps
/// generate the period lattice.
pub fn flow_gaps<S: Scalar>(
    curve: &RationalSingularCurve<S>,
    dist: &MlDistribution<S>,
) -> Result<Vec<S>> {
    dist.validate(curve)?;
    require_nodal(curve)?;
    let k = primitive_on_normalisation(curve, dist)?;
    // edges: (component a, component b, gap = k(pa) - k(pb))
    let mut edges: Vec<(usize, usize, S)> = Vec::new();
    for sing in &curve.singularities {
        let (first, rest) = sing.preimages.split_first().expect("branches >= 1");
        let pa = &curve.points[*first];
        let ka = k[pa.component].eval_at(&pa.at)?;
        for &pj in rest {
            let pb = &curve.points[pj];
            let kb = k[pb.component].eval_at(&pb.at)?;
            edges.push((pa.component, pb.component, ka.sub(&kb)));
        }
    }
    // spanning-tree adjustment of per-component constants
    let n = curve.components.len();
    let mut constant: Vec<Option<S>> = vec![None; n];
    let mut gaps = Vec::new();
    // iterate until all components are pinned (forest roots get zero)
    loop {
        let root = (0..n).find(|&c| constant[c].is_none());
        let Some(root) = root else { break };
        constant[root] = Some(S::zero());
        let mut changed = true;
        while changed {
            changed = false;
            for (a, b, g) in &edges {
                // want adjusted gap zero on tree edges:
                // (k + c)(pa) - (k + c)(pb) = g + c_a - c_b
                match (constant[*a].clone(), constant[*b].clone()) {
                    (Some(ca), None) => {
                        constant[*b] = Some(g.add(&ca));
                        changed = true;
                    }
                    (None, Some(cb)) => {
                        constant[*a] = Some(cb.sub(g));
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
    }
    let mut used_tree: Vec<bool> = vec![false; edges.len()];
    // mark one spanning set: recompute adjusted gaps; the zero ones formed
    // the tree, nonzero ones are genuine cycles
    for (i, (a, b, g)) in edges.iter().enumerate() {
        let ca = constant[*a].clone().unwrap();
        let cb = constant[*b].clone().unwrap();
        let adjusted = g.add(&ca).sub(&cb);
        if !used_tree[i] {
            gaps.push(adjusted);
        }
        used_tree[i] = true;
    }
    Ok(gaps)
}

fn is_integer_multiple<S: Scalar>(value: &S, tol: &Tolerance) -> bool {
    if S::EXACT {
        // exact kind: the value must be a rational integer
        let c = value.to_complex();
        if c.im != 0.0 {
            // fall through to the exact test below; to_complex is only a hint
        }
        // exact test through the literal structure
        let lit = value.format_literal();
        // integers have no '/' and no imaginary part marker
        !lit.contains('i') && !lit.contains('/')
    } else {
        let c = value.to_complex();
        let nearest = c.re.round();
        ((c.re - nearest).powi(2) + c.im.powi(2)).sqrt() <= tol.eps
    }
}

/// Classifies the flow of `exp(2 pi i t h)` at the tested period `T`:
/// trivial iff the distribution is solvable on the curve; `T`-periodic iff
/// `T` times every cycle gap is an integer.
pub fn flow_classify<S: Scalar>(
    curve: &RationalSingularCurve<S>,
    dist: &MlDistribution<S>,
    period: &S,
) -> Result<FlowReport<S>> {
    if ml_solve(curve, dist)?.is_some() {
        return Ok(FlowReport {
            class: FlowClass::Trivial,
            gaps: Vec::new(),
        });
    }
    let gaps = flow_gaps(curve, dist)?;
    let tol = Tolerance::new(1e-9);
    let periodic = gaps
        .iter()
        .all(|g| is_integer_multiple(&g.mul(period), &tol));
    Ok(FlowReport {
        class: if periodic {
            FlowClass::Periodic
        } else {
            FlowClass::AperiodicOnBudget
        },
        gaps,
    })
}

/// Is the twisted bundle trivial at time `t`? (`t` times every cycle gap is
/// an integer; solvable distributions are trivial at all times.)
pub fn line_bundle_trivial_at<S: Scalar>(
    curve: &RationalSingularCurve<S>,
    dist: &MlDistribution<S>,
    t: &S,
) -> Result<bool> {
    if ml_solve(curve, dist)?.is_some() {
        return Ok(true);
    }
    let gaps = flow_gaps(curve, dist)?;
    let tol = Tolerance::new(1e-9);
    Ok(gaps.iter().all(|g| is_integer_multiple(&g.mul(t), &tol)))
}

/// Taxonomy of a pair of flows by their classes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CasePair {
    /// Both flows trivial.
    Case1,
    /// One trivial, one periodic.
    Case2,
    /// Both periodic.
    Case3,
    /// Outside the taxonomy at the tested period.
    None,
}

#[derive(Clone, Debug)]
pub struct CaseReport<S: Scalar> {
    pub case: CasePair,
    pub first: FlowReport<S>,
    pub second: FlowReport<S>,
}

pub fn case_classify<S: Scalar>(
    curve: &RationalSingularCurve<S>,
    h1: &MlDistribution<S>,
    h2: &MlDistribution<S>,
    period: &S,
) -> Result<CaseReport<S>> {
    let first = flow_classify(curve, h1, period)?;
    let second = flow_classify(curve, h2, period)?;
    let case = match (&first.class, &second.class) {
        (FlowClass::Trivial, FlowClass::Trivial) => CasePair::Case1,
        (FlowClass::Trivial, FlowClass::Periodic) | (FlowClass::Periodic, FlowClass::Trivial) => {
            CasePair::Case2
        }
        (FlowClass::Periodic, FlowClass::Periodic) => CasePair::Case3,
        _ => CasePair::None,
    };
    Ok(CaseReport {
        case,
        first,
        second,
    })
}

/// Named integrable-system presets over the exact kind.
pub fn preset_exact(
    name: &str,
    marked: &[usize],
) -> Result<(MlDistribution<ExactScalar>, MlDistribution<ExactScalar>)> {
    let one = ExactScalar::one();
    let i = ExactScalar::i();
    match name {
        // KdV: n = 1, h1 = 1/z^2, h2 = 1/z
        "kdv" => {
            if marked.len() != 1 {
                return Err(Error::Schema("the KdV preset marks one point".into()));
            }
            Ok((
                MlDistribution::new(
                    marked.to_vec(),
                    vec![PrincipalPart::new(vec![ExactScalar::zero(), one.clone()])],
                )?,
                MlDistribution::new(marked.to_vec(), vec![PrincipalPart::new(vec![one])])?,
            ))
        }
        // NLS: n = 2, h1 = (1/z, 1/z), h2 = (i/z, -i/z)
        "nls" => {
            if marked.len() != 2 {
                return Err(Error::Schema("the NLS preset marks two points".into()));
            }
            Ok((
                MlDistribution::new(
                    marked.to_vec(),
                    vec![
                        PrincipalPart::new(vec![one.clone()]),
                        PrincipalPart::new(vec![one]),
                    ],
                )?,
                MlDistribution::new(
                    marked.to_vec(),
                    vec![
                        PrincipalPart::new(vec![i.clone()]),
                        PrincipalPart::new(vec![i.neg()]),
                    ],
                )?,
            ))
        }
        other => Err(Error::Unsupported(format!(
            "unknown exact preset `{other}` (kp needs the numeric kind)"
        ))),
    }
}

/// KP preset over the numeric kind: `h1 = 1/z`, `h2 = 2 pi i / z^2`.
pub fn preset_kp_numeric(
    marked: usize,
) -> Result<(
    MlDistribution<crate::scalar::NumericScalar>,
    MlDistribution<crate::scalar::NumericScalar>,
)> {
    use crate::scalar::NumericScalar;
    let one = NumericScalar::new(1.0, 0.0);
    let two_pi_i = NumericScalar::new(0.0, 2.0 * std::f64::consts::PI);
    Ok((
        MlDistribution::new(vec![marked], vec![PrincipalPart::new(vec![one])])?,
        MlDistribution::new(
            vec![marked],
            vec![PrincipalPart::new(vec![NumericScalar::new(0.0, 0.0), two_pi_i])],
        )?,
    ))
}

/// Checks solvability against the pairing on a batch of distributions.
pub fn solvability_matches_pairing<S: Scalar>(
    curve: &RationalSingularCurve<S>,
    dist: &MlDistribution<S>,
) -> Result<bool> {
    let tol = Tolerance::new(1e-9);
    let pair = ml_pair_all(curve, dist)?;
    let solvable = ml_solve(curve, dist)?.is_some();
    let zero_class = pair.iter().all(|v| v.is_zero(&tol));
    Ok(solvable == zero_class)
}
