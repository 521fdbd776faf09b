//! Mittag-Leffler distributions on the nodal cubic and the line-bundle
//! flows they generate: solvability against the residue pairing, branch-gap
//! periods, and the KdV/NLS presets.
//!
//! ```bash
//! cargo run --example krichever_flows
//! ```

use singcurve::curve::NamedPoint;
use singcurve::fixtures::node_curve;
use singcurve::krichever::{
    case_classify, flow_classify, line_bundle_trivial_at, ml_pair_all, ml_solve, preset_exact,
    MlDistribution, PrincipalPart,
};
use singcurve::{ExactScalar, P1Point, Scalar};

fn main() -> singcurve::Result<()> {
    let one = ExactScalar::from_int(1);
    let mut curve = node_curve()?;
    curve.points.push(NamedPoint {
        name: "q1".into(),
        component: 0,
        at: P1Point::finite(one.clone()),
    });
    let q1 = curve.points.len() - 1;

    // h = 1/z at w = 1: unsolvable; its flow is periodic with period 1
    let h = MlDistribution::new(vec![q1], vec![PrincipalPart::new(vec![one.clone()])])?;
    let pairing = ml_pair_all(&curve, &h)?;
    println!("h = 1/z at w = 1:");
    println!("  pairing against H0(Omega): {:?}", pairing.iter().map(|v| v.format_literal()).collect::<Vec<_>>());
    println!("  solvable: {}", ml_solve(&curve, &h)?.is_some());
    let flow = flow_classify(&curve, &h, &one)?;
    println!("  flow at T = 1: {:?}, gaps {:?}", flow.class, flow.gaps.iter().map(|g| g.format_literal()).collect::<Vec<_>>());
    for t in ["0", "1", "-3", "1/2"] {
        let tv = ExactScalar::parse_literal_str(t)?;
        println!(
            "  L(t) trivial at t = {t}: {}",
            line_bundle_trivial_at(&curve, &h, &tv)?
        );
    }

    // h = 1/z^2 + 1/z is solvable: the class vanishes
    let h2 = MlDistribution::new(
        vec![q1],
        vec![PrincipalPart::new(vec![one.clone(), one.clone()])],
    )?;
    println!("\nh = 1/z^2 + 1/z:");
    match ml_solve(&curve, &h2)? {
        Some(f) => println!("  solved by f = {}", f[0].format_with("w")),
        None => println!("  unsolvable"),
    }

    // KdV preset: h1 = 1/z^2, h2 = 1/z
    let (kdv1, kdv2) = preset_exact("kdv", &[q1])?;
    let case = case_classify(&curve, &kdv1, &kdv2, &one)?;
    println!("\nKdV preset on the node: {:?}", case.case);
    println!("  h1 flow: {:?}", case.first.class);
    println!("  h2 flow: {:?}", case.second.class);

    // NLS preset needs two marked points
    curve.points.push(NamedPoint {
        name: "q2".into(),
        component: 0,
        at: P1Point::finite(ExactScalar::from_int(2)),
    });
    let q2 = curve.points.len() - 1;
    let (nls1, nls2) = preset_exact("nls", &[q1, q2])?;
    let case = case_classify(&curve, &nls1, &nls2, &one)?;
    println!("\nNLS preset on the two-marked node: {:?}", case.case);
    println!(
        "  h1 gaps {:?} -> {:?}",
        case.first.gaps.iter().map(|g| g.format_literal()).collect::<Vec<_>>(),
        case.first.class
    );
    println!(
        "  h2 gaps {:?} -> {:?}",
        case.second.gaps.iter().map(|g| g.format_literal()).collect::<Vec<_>>(),
        case.second.class
    );
    Ok(())
}

trait ParseHelper: Sized {
    fn parse_literal_str(s: &str) -> singcurve::Result<Self>;
}

impl ParseHelper for ExactScalar {
    fn parse_literal_str(s: &str) -> singcurve::Result<Self> {
        use singcurve::Scalar;
        Self::parse_literal(s)
    }
}
