//! The eigenvalue curve of a 3x3 polynomial matrix family whose divisor
//! stays non-free even on its middleding: the endomorphism ring of the
//! eigenvector sheaf at the triple point, its branch partition, and the
//! commutant correspondence.
//!
//! ```bash
//! cargo run --example middleding_spectral
//! ```

use singcurve::fixtures::triple_matrix_spec;
use singcurve::middleding::{commutant_matrix, eigen_curve, endomorphism_ring, phi_check};
use singcurve::parse::parse_ratfun;
use singcurve::ExactScalar;

fn main() -> singcurve::Result<()> {
    let spec = triple_matrix_spec::<ExactScalar>()?;
    let curve = eigen_curve(spec)?;

    println!("normalised eigenvectors per branch:");
    for (i, psi) in curve.psi.iter().enumerate() {
        let entries: Vec<String> = psi.iter().map(|f| f.format_with("lambda")).collect();
        println!("  branch {i}: ({})", entries.join(", "));
    }

    let report = phi_check(&curve)?;
    println!("\nstructure morphism checks:");
    println!("  eigen equations hold  : {}", report.eigen_equations);
    println!("  injective at test pt  : {}", report.injective_at_test_point);
    println!("  Weierstrass span      : {}", report.weierstrass_spans_ring);

    let stalk = &curve.stalks[0];
    println!("\ntriple point at lambda = 0:");
    println!("  ring delta       : {}", stalk.ring.delta());
    println!("  divisor degree   : {}", stalk.divisor.degree()?);
    println!("  value rank       : {}", stalk.divisor.preimage_value_rank()?);

    let md = endomorphism_ring(&stalk.divisor)?;
    println!("\nmiddleding of the eigenvector sheaf:");
    println!("  endomorphism ring delta : {}", md.ring_prime.delta());
    println!("  branch partition        : {:?}", md.partition);
    println!("  lift freeness           : {}", md.freeness.describe());

    // eigenvalues of commuting matrices live on the middleding and back:
    // nu = mu^2 / lambda is holomorphic there, so its matrix is polynomial
    let nu = vec![
        parse_ratfun::<ExactScalar>("lambda", "lambda")?,
        parse_ratfun::<ExactScalar>("0", "lambda")?,
        parse_ratfun::<ExactScalar>("lambda", "lambda")?,
    ];
    let res = commutant_matrix(&curve, &nu)?;
    println!("\ncommutant of nu = mu^2/lambda:");
    for row in &res.matrix {
        let entries: Vec<String> = row.iter().map(|f| f.format_with("lambda")).collect();
        println!("  [{}]", entries.join(", "));
    }
    println!("  polynomial : {}", res.polynomial);
    println!("  commutes   : {}", res.commutes);

    // nu = mu / lambda is not in the ring: the matrix picks up 1/lambda
    let bad = vec![
        parse_ratfun::<ExactScalar>("1", "lambda")?,
        parse_ratfun::<ExactScalar>("0", "lambda")?,
        parse_ratfun::<ExactScalar>("-1", "lambda")?,
    ];
    let res = commutant_matrix(&curve, &bad)?;
    println!("\ncommutant of nu = mu/lambda: polynomial = {}", res.polynomial);
    Ok(())
}
