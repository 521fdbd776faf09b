//! Generalised divisor stalks on the cusp: the sheaf generated by 1 and
//! x2/x1 has degree 1 but no single generator, while the one generated by
//! x1/x2 is locally free of the same degree.
//!
//! ```bash
//! cargo run --example generalised_divisors
//! ```

use singcurve::divisor::{full_stalk, DivisorStalk};
use singcurve::localring::{poly_jet, LocalRingStalk};
use singcurve::{ExactScalar, MultiJet, Scalar, Tolerance};

fn main() -> singcurve::Result<()> {
    let tol = Tolerance::exact();
    let cusp = LocalRingStalk::<ExactScalar>::from_divisor(&[2], None, &tol)?;
    let one = ExactScalar::from_int(1);

    // S = Obar, generated over the cusp ring by 1 and x2/x1 = t
    let obar = full_stalk(&cusp)?;
    println!("S = Obar on the cusp:");
    println!("  degree        : {}", obar.degree()?);
    println!("  branch orders : {:?}", obar.branch_orders());
    println!("  freeness      : {}", obar.freeness()?.describe());

    // S' generated by x1/x2 = t^-1: same degree, locally free
    let gen = MultiJet::new(vec![poly_jet("t0", -1, vec![one.clone()])])?;
    let free = DivisorStalk::module_closure(&cusp, &[gen])?;
    println!("\nS' generated by x1/x2:");
    println!("  degree        : {}", free.degree()?);
    println!("  branch orders : {:?}", free.branch_orders());
    match free.is_locally_free()? {
        Some(f) => println!("  generator     : {f:?}"),
        None => println!("  generator     : none"),
    }

    // the degree does not depend on the chosen over-module
    let extra = MultiJet::new(vec![poly_jet("t0", -2, vec![one])])?;
    assert_eq!(
        obar.degree()?,
        obar.degree_with_overmodule(std::slice::from_ref(&extra))?
    );
    println!("\ndegree agrees against an enlarged over-module: ok");

    // multiplying by a unit changes nothing that matters
    let unit = MultiJet::new(vec![poly_jet(
        "t0",
        0,
        vec![ExactScalar::from_int(2), ExactScalar::from_int(1)],
    )])?;
    let twisted = free.multiply_by_unit(&unit)?;
    assert_eq!(twisted.degree()?, free.degree()?);
    assert!(twisted.freeness()?.is_free());
    println!("unit twist preserves degree and freeness: ok");
    Ok(())
}
