//! Baker-Akhiezer functions with KP flow data on the nodal cubic: the
//! unique normalised solution, its exact time derivatives, the heat
//! potential u(x, y) and the PDE residual, plus the exceptional time found
//! by bisection.
//!
//! ```bash
//! cargo run --example baker_akhiezer
//! ```

use num_complex::Complex64;

use singcurve::baker::{heat_check, BaOutcome, BaProblem};
use singcurve::curve::{GeneralisedDivisor, NamedPoint};
use singcurve::fixtures::node_curve;
use singcurve::krichever::PrincipalPart;
use singcurve::{ExactScalar, NumericScalar, P1Point, Scalar};

fn main() -> singcurve::Result<()> {
    // FIX the data: node at w = 0 ~ infinity, marked point q1 at w = 1,
    // divisor = one simple pole at w = 2 (degree g' + n - 1 = 1),
    // KP flows h1 = 1/z, h2 = 2 pi i / z^2
    let mut curve = node_curve()?;
    curve.points.push(NamedPoint {
        name: "q1".into(),
        component: 0,
        at: P1Point::finite(ExactScalar::from_int(1)),
    });
    curve.points.push(NamedPoint {
        name: "pole".into(),
        component: 0,
        at: P1Point::finite(ExactScalar::from_int(2)),
    });
    let marked = vec![curve.points.len() - 2];
    let divisor = GeneralisedDivisor::of_regular_part(vec![(curve.points.len() - 1, 1)]);
    let one = NumericScalar::new(1.0, 0.0);
    let two_pi = 2.0 * std::f64::consts::PI;
    let flows = vec![
        vec![PrincipalPart::new(vec![one])],
        vec![PrincipalPart::new(vec![
            NumericScalar::new(0.0, 0.0),
            NumericScalar::new(0.0, two_pi),
        ])],
    ];
    let problem = BaProblem::new(curve, divisor, marked, flows, vec![vec![one]])?;
    println!("candidate dimension: {}", problem.candidate_count());

    // solve on a small grid of real times
    println!("\n  x      y      u(x,y)                     residual    condition");
    for (x, y) in [(0.0, 0.0), (0.25, 0.1), (0.5, -0.2), (-0.3, 0.3)] {
        let t = [Complex64::new(x, 0.0), Complex64::new(y, 0.0)];
        match problem.ba_solve(&t)? {
            BaOutcome::Solved(sol) => {
                let hc = heat_check(
                    &problem,
                    &t,
                    &[
                        P1Point::Finite(NumericScalar::new(4.0, 1.0)),
                        P1Point::Finite(NumericScalar::new(-3.0, 0.5)),
                        P1Point::Finite(NumericScalar::new(6.0, -2.0)),
                    ],
                )?;
                println!(
                    "  {x:>5.2} {y:>5.2}  {:>25}  {:.2e}    {:.2e}",
                    NumericScalar(hc.u).format_literal(),
                    hc.max_rel_residual,
                    sol.condition
                );
            }
            BaOutcome::InExceptionalSet { sigma_min, .. } => {
                println!("  {x:>5.2} {y:>5.2}  exceptional (sigma_min = {sigma_min:.2e})");
            }
        }
    }

    // evaluate the function away from the marked point
    let t = [Complex64::new(0.2, 0.0), Complex64::new(0.05, 0.0)];
    let sol = problem.ba_solve(&t)?.solution().cloned().expect("generic time");
    let sample = problem.evaluate(
        &sol,
        0,
        &P1Point::Finite(NumericScalar::new(4.0, 0.0)),
    )?;
    println!("\npsi at w = 4, t = (0.2, 0.05): {}", NumericScalar(sample[0]).format_literal());
    // node matching: the two glued branch values agree
    let v0 = problem.evaluate(&sol, 0, &P1Point::Finite(NumericScalar::new(0.0, 0.0)))?[0];
    let vinf = problem.evaluate(&sol, 0, &P1Point::Infinity)?[0];
    println!("glued values psi(0) = {}, psi(inf) = {}", v0, vinf);

    // the exceptional set crosses the line x = 0 at y = -ln 2 / (4 pi^2)
    let y_star = -(2.0f64).ln() / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    let sigma = problem.sigma_min_at(&[Complex64::new(0.0, 0.0), Complex64::new(y_star, 0.0)])?;
    println!("\nexceptional time y* = {y_star:.6}: sigma_min = {sigma:.2e}");
    Ok(())
}
