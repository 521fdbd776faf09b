//! Riemann-Roch on rational singular curves, with h^1 always computed as
//! h^0 of the Serre-dual form divisor. Every instance tests both theorems.
//!
//! ```bash
//! cargo run --example riemann_roch
//! ```

use singcurve::curve::{rr_serre_check, GeneralisedDivisor, NamedPoint};
use singcurve::divisor::full_stalk;
use singcurve::fixtures::{cusp_curve, node_curve, three_point_curve};
use singcurve::{ExactScalar, P1Point, Scalar};

fn main() -> singcurve::Result<()> {
    type Make = fn() -> singcurve::Result<singcurve::curve::RationalSingularCurve<ExactScalar>>;
    for (name, make) in [
        ("node (g' = 1)", node_curve as Make),
        ("cusp (g' = 1)", cusp_curve as Make),
        ("triple point (g' = 2)", three_point_curve as Make),
    ] {
        let mut curve = make()?;
        curve.points.push(NamedPoint {
            name: "paux".into(),
            component: 0,
            at: P1Point::finite(ExactScalar::from_int(2)),
        });
        let aux = curve.points.len() - 1;
        println!("== {name} ==");
        println!("  deg   h0  h0(Omega)   h0 - h1 = deg + 1 - g'");
        for k in -3..=5 {
            let div = GeneralisedDivisor::of_regular_part(vec![(aux, k)]);
            let r = rr_serre_check(&curve, &div)?;
            println!(
                "  {k:>3}  {:>3}  {:>7}    {}",
                r.h0,
                r.h0_omega,
                if r.all_pass() { "PASS" } else { "FAIL" }
            );
            assert!(r.all_pass());
        }
        // a stalk divisor: the full normalisation sheaf at the singularity
        let ring = &curve.singularities[0].ring;
        let mut div = GeneralisedDivisor::trivial();
        div.stalks.insert(0, full_stalk(ring)?);
        let r = rr_serre_check(&curve, &div)?;
        println!(
            "  Obar-stalk divisor: deg {} h0 {} h1 {} -> {}",
            r.degree,
            r.h0,
            r.h0_omega,
            if r.all_pass() { "PASS" } else { "FAIL" }
        );
        println!();
    }
    Ok(())
}
