//! Local ring stalks of curve singularities: delta invariants, conductors
//! and the certified inclusion chain `C + r^m ⊆ O ⊆ C + r`.
//!
//! ```bash
//! cargo run --example local_rings
//! ```

use singcurve::localring::{poly_jet, AmbientStalk, LocalRingStalk};
use singcurve::{ExactScalar, MultiJet, Scalar, Tolerance};

fn main() -> singcurve::Result<()> {
    let tol = Tolerance::exact();

    println!("== ordinary double point (node), glued from two branches ==");
    let node = LocalRingStalk::<ExactScalar>::from_divisor(&[1, 1], None, &tol)?;
    show(&node)?;

    println!("\n== ordinary cusp, the ring C + t^2 C{{t}} ==");
    let cusp = LocalRingStalk::<ExactScalar>::from_divisor(&[2], None, &tol)?;
    show(&cusp)?;

    // the same cusp built from its coordinate generators x1 = t^2, x2 = t^3
    println!("\n== the cusp again, as the closure of {{t^2, t^3}} ==");
    let ambient = AmbientStalk::new(1, 6);
    let gens = vec![
        MultiJet::new(vec![poly_jet("t0", 2, vec![ExactScalar::from_int(1)])])?,
        MultiJet::new(vec![poly_jet("t0", 3, vec![ExactScalar::from_int(1)])])?,
    ];
    let cusp2 = LocalRingStalk::subalgebra_closure(&ambient, &gens, &tol)?;
    show(&cusp2)?;
    assert_eq!(cusp.delta(), cusp2.delta());

    println!("\n== ordinary triple point from the divisor p1 + p2 + p3 ==");
    let triple = LocalRingStalk::<ExactScalar>::from_divisor(&[1, 1, 1], None, &tol)?;
    show(&triple)?;

    println!("\n== a singular point defined by the divisor 3p + 2q ==");
    let heavy = LocalRingStalk::<ExactScalar>::from_divisor(&[3, 2], None, &tol)?;
    show(&heavy)?;

    Ok(())
}

fn show(ring: &LocalRingStalk<ExactScalar>) -> singcurve::Result<()> {
    let (_, n_q) = ring.conductor()?;
    let report = ring.check_ring_axioms()?;
    println!("  branches            : {}", ring.branches());
    println!("  delta invariant     : {}", ring.delta());
    println!("  conductor n_q       : {n_q}");
    println!("  stability exponent  : {}", ring.stability_exponent());
    println!("  chain certificate   : {}", if report.all_pass() { "ok" } else { "FAILED" });
    // the invariants do not move when the jet window grows
    let wider = ring.rebuild(ring.ambient().trunc + 5)?;
    assert_eq!(ring.delta(), wider.delta());
    assert_eq!(n_q, wider.conductor()?.1);
    Ok(())
}
