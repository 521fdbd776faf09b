//! Regular differential forms and Serre duality at desk scale: the residue
//! pairing between Obar/O and Omega/(holomorphic forms) is a full-rank
//! delta x delta matrix, and n_q = 2 delta exactly for Gorenstein points.
//!
//! ```bash
//! cargo run --example serre_duality
//! ```

use singcurve::curve::{
    form_divisor_degree, gorenstein_report, h0_forms, matrix_rank, omega_divisor,
    regular_forms_stalk, stalk_pairing_matrix, GeneralisedDivisor,
};
use singcurve::fixtures::{cusp_curve, node_curve, three_point_curve};
use singcurve::localring::LocalRingStalk;
use singcurve::{ExactScalar, Tolerance};

fn main() -> singcurve::Result<()> {
    let tol = Tolerance::exact();

    println!("stalk-level duality:");
    println!("  singularity      delta  n_q  pairing-rank  Omega free");
    for (name, mults) in [
        ("node", vec![1u32, 1]),
        ("cusp", vec![2]),
        ("triple point", vec![1, 1, 1]),
        ("E6-type (3)", vec![3]),
    ] {
        let ring = LocalRingStalk::<ExactScalar>::from_divisor(&mults, None, &tol)?;
        let delta = ring.delta();
        let pairing = stalk_pairing_matrix(&ring)?;
        let rank = matrix_rank(&pairing, &tol);
        let g = gorenstein_report(&ring)?;
        println!(
            "  {name:<15}  {delta:>4}  {:>3}  {rank:>12}  {}",
            g.n_q, g.omega_free
        );
        assert_eq!(rank, delta);
        assert!(g.iff_ok && g.bounds_ok);
        // the form quotient has dimension delta
        let (_, quot) = regular_forms_stalk(&ring)?;
        assert_eq!(quot, delta);
    }

    println!("\nglobal forms: h0(Omega) = g' and deg Omega = 2g' - 2");
    for (name, make) in [
        ("node", node_curve as fn() -> _),
        ("cusp", cusp_curve as fn() -> _),
        ("triple", three_point_curve as fn() -> _),
    ] {
        let curve = make()?;
        let fdiv = omega_divisor(&curve, &GeneralisedDivisor::trivial())?;
        let h0 = h0_forms(&curve, &fdiv)?.dim();
        let deg = form_divisor_degree(&curve, &fdiv)?;
        let genus = curve.arithmetic_genus();
        println!("  {name:<7}: g' = {genus}, h0(Omega) = {h0}, deg Omega = {deg}");
        assert_eq!(h0 as i64, genus);
        assert_eq!(deg, 2 * genus - 2);
    }
    Ok(())
}
