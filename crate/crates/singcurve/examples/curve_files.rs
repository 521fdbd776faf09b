//! The JSON curve-file format: build the nodal cubic in memory, emit it,
//! re-ingest it, and show that the analysis agrees byte for byte.
//!
//! ```bash
//! cargo run --example curve_files
//! ```

use std::collections::BTreeMap;

use singcurve::curve::GeneralisedDivisor;
use singcurve::fixtures::node_curve;
use singcurve::io::{emit_curve, load_curve, parse_curve_file};
use singcurve::{ExactScalar, Tolerance};

fn main() -> singcurve::Result<()> {
    let curve = node_curve()?;
    let mut divisors = BTreeMap::new();
    divisors.insert("O".to_string(), GeneralisedDivisor::trivial());

    let file = emit_curve(&curve, &divisors);
    let json = serde_json::to_string_pretty(&file).expect("serializable");
    println!("emitted curve file:\n{json}\n");

    let reloaded = load_curve::<ExactScalar>(
        &parse_curve_file(&json)?,
        &Tolerance::exact(),
        None,
    )?;
    println!(
        "reloaded: delta = {}, arithmetic genus = {}",
        reloaded.curve.delta(),
        reloaded.curve.arithmetic_genus()
    );
    let again = serde_json::to_string_pretty(&emit_curve(&reloaded.curve, &reloaded.divisors))
        .expect("serializable");
    assert_eq!(json, again, "round trip is the identity");
    println!("round trip is byte-identical: ok");
    Ok(())
}
