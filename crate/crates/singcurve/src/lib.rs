//! Exact computer algebra for compact singular curves whose normalisation is
//! a disjoint union of rational components.
//!
//! The crate models local ring stalks of curve singularities as row-reduced
//! subspaces of truncated multi-branch Laurent algebras, and builds on them:
//!
//! - local invariants: delta invariant, conductor, inclusion-chain
//!   certificates ([`localring`]);
//! - generalised divisor stalks: module closure, degree, local freeness
//!   ([`divisor`]);
//! - endomorphism rings and partial desingularisations, the hyperelliptic
//!   `x^2 = y^n` normal form, and spectral curves of polynomial matrices
//!   ([`middleding`]);
//! - global curves with Riemann-Roch, regular differential forms, the
//!   residue pairing and Serre duality checks ([`curve`]);
//! - Mittag-Leffler distributions, line-bundle flows and their
//!   trivial/periodic classification ([`krichever`]);
//! - Baker-Akhiezer functions with exact time derivatives and the
//!   heat-equation check ([`baker`]).
//!
//! Every exact computation is reproducible bit for bit; numeric paths take
//! explicit tolerances. Start with the runnable programs in `examples/`:
//!
//! ```text
//! cargo run --example local_rings
//! cargo run --example generalised_divisors
//! cargo run --example middleding_spectral
//! cargo run --example hyperelliptic_normal_form
//! cargo run --example riemann_roch
//! cargo run --example serre_duality
//! cargo run --example krichever_flows
//! cargo run --example baker_akhiezer
//! cargo run --example curve_files
//! ```
//!
//! A thin CLI (`singcurve`) exposes the same pipelines over JSON curve files;
//! see the README for the schema.

pub mod baker;
pub mod curve;
pub mod divisor;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod jet;
pub mod krichever;
pub mod linalg;
pub mod localring;
pub mod middleding;
pub mod numeric;
pub mod parse;
pub mod ratfun;
pub mod scalar;

pub use error::{Error, Result};
pub use jet::{FormJet, LaurentJet, MultiJet};
pub use linalg::{JetWindow, StalkSubspace};
pub use ratfun::{P1Point, Poly, RatFun};
pub use scalar::{ExactScalar, NumericScalar, Scalar, Tolerance};

/// Default seed for every randomized search in the crate.
pub const DEFAULT_SEED: u64 = 0x5EED;
