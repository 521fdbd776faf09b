//! Two-sheeted coverings in the normal form x^2 = y^n: every divisor stalk
//! becomes free on its middleding, with the ring generated by {y, x/y^l}.
//!
//! ```bash
//! cargo run --example hyperelliptic_normal_form
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use singcurve::divisor::{full_stalk, DivisorStalk};
use singcurve::localring::poly_jet;
use singcurve::middleding::{an_model, endomorphism_ring, hyperelliptic_reduce};
use singcurve::{ExactScalar, MultiJet, Scalar, Tolerance};

fn main() -> singcurve::Result<()> {
    let tol = Tolerance::exact();

    for n in [2u32, 3, 4, 5, 6] {
        let (ring, _x, _y) = an_model::<ExactScalar>(n, &tol)?;
        let obar = full_stalk(&ring)?;
        let red = hyperelliptic_reduce(n, &obar)?;
        println!(
            "x^2 = y^{n}: delta = {}, Obar reduces with l = {}, middleding delta = {}",
            ring.delta(),
            red.ell,
            red.middleding_ring.delta()
        );
    }

    // random modules on the models: the lift to the middleding is always free
    println!("\nrandom divisor stalks on the models:");
    let mut rng = ChaCha8Rng::seed_from_u64(singcurve::DEFAULT_SEED);
    for _ in 0..8 {
        let n = rng.gen_range(2..=8u32);
        let (ring, _, _) = an_model::<ExactScalar>(n, &tol)?;
        let b = ring.branches();
        let gen = MultiJet::new(
            (0..b)
                .map(|j| {
                    poly_jet(
                        &format!("t{j}"),
                        rng.gen_range(-2i64..=1),
                        vec![ExactScalar::from_int(1)],
                    )
                })
                .collect::<Vec<_>>(),
        )?;
        let stalk = DivisorStalk::module_closure(&ring, &[gen])?;
        let md = endomorphism_ring(&stalk)?;
        println!(
            "  n = {n}: divisor degree {} -> lift {}",
            stalk.degree()?,
            md.freeness.describe()
        );
        assert!(md.freeness.is_free());
    }
    Ok(())
}
