//! The `singcurve/1` JSON file formats and report rendering.
//!
//! One canonical schema describes curves, divisors, flow data and matrix
//! families; plain-text reports are derived views of the JSON values, so
//! golden-file comparisons can use either representation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::curve::{Component, GeneralisedDivisor, NamedPoint, RationalSingularCurve, Singularity};
use crate::divisor::DivisorStalk;
use crate::error::{Error, Result};
use crate::jet::{LaurentJet, MultiJet};
use crate::localring::{AmbientStalk, LocalRingStalk, RingRecipe, MAX_GEN_TRUNC};
use crate::ratfun::P1Point;
use crate::scalar::{Scalar, Tolerance};

pub const SCHEMA: &str = "singcurve/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveFile {
    pub schema: String,
    pub components: Vec<ComponentSpec>,
    pub points: Vec<PointSpec>,
    #[serde(default)]
    pub singularities: Vec<SingularitySpec>,
    #[serde(default)]
    pub divisors: BTreeMap<String, DivisorSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSpec {
    pub name: String,
    pub component: String,
    /// Scalar literal, or `"inf"` for the point at infinity.
    pub value: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularitySpec {
    pub name: String,
    pub preimages: Vec<String>,
    pub ring: RingSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RingSpec {
    FromDivisor { multiplicities: Vec<u32> },
    Span { generators: Vec<JetLiteral> },
    Full,
}

/// A multijet literal: one object per branch mapping exponent strings to
/// scalar literals, e.g. `[{"-1": "1"}, {"0": "2/3"}]`.
pub type JetLiteral = Vec<BTreeMap<String, String>>;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct DivisorSpec {
    #[serde(default)]
    pub regular_part: Vec<RegularPartSpec>,
    #[serde(default)]
    pub stalks: BTreeMap<String, StalkSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularPartSpec {
    pub point: String,
    pub mult: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StalkSpec {
    pub generators: Vec<JetLiteral>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KricheverFile {
    pub marked: Vec<String>,
    #[serde(default)]
    pub parts: Vec<Vec<String>>,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub period: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BakerFile {
    /// Name of a divisor in the curve file.
    pub divisor: String,
    pub marked: Vec<String>,
    /// `flows[l][k]`: coefficient literals of `z^-1, z^-2, ...`.
    pub flows: Vec<Vec<Vec<String>>>,
    /// Normalisation matrix literals; identity when omitted.
    #[serde(default)]
    pub c: Option<Vec<Vec<String>>>,
    pub times: Vec<Vec<String>>,
    #[serde(default)]
    pub samples: Vec<String>,
    #[serde(default)]
    pub heat_check: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(default = "default_var")]
    pub variable: String,
    pub matrix: Vec<Vec<String>>,
    pub branches: Vec<String>,
    pub linear_form: Vec<String>,
    pub singular_lambdas: Vec<String>,
}

fn default_var() -> String {
    "lambda".into()
}

pub fn parse_curve_file(text: &str) -> Result<CurveFile> {
    let file: CurveFile =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("{e}")))?;
    if file.schema != SCHEMA {
        return Err(Error::Schema(format!(
            "unsupported schema `{}` (expected `{SCHEMA}`)",
            file.schema
        )));
    }
    Ok(file)
}

fn parse_point<S: Scalar>(value: &str) -> Result<P1Point<S>> {
    if value == "inf" || value == "infinity" {
        Ok(P1Point::Infinity)
    } else {
        Ok(P1Point::Finite(S::parse_literal(value)?))
    }
}

fn format_point<S: Scalar>(p: &P1Point<S>) -> String {
    match p {
        P1Point::Finite(v) => v.format_literal(),
        P1Point::Infinity => "inf".into(),
    }
}

pub fn parse_jet_literal<S: Scalar>(lit: &JetLiteral, coords: &[String]) -> Result<MultiJet<S>> {
    if lit.len() != coords.len() {
        return Err(Error::Schema(format!(
            "jet literal has {} branches, expected {}",
            lit.len(),
            coords.len()
        )));
    }
    let mut jets = Vec::new();
    for (branch, coord) in lit.iter().zip(coords) {
        let mut terms: Vec<(i64, S)> = Vec::new();
        for (expo, val) in branch {
            let e: i64 = expo
                .parse()
                .map_err(|_| Error::Schema(format!("bad exponent `{expo}`")))?;
            terms.push((e, S::parse_literal(val)?));
        }
        terms.sort_by_key(|&(e, _)| e);
        let jet = if terms.is_empty() {
            LaurentJet::zero(coord, MAX_GEN_TRUNC)
        } else {
            let low = terms[0].0;
            let high = terms.last().unwrap().0;
            let mut coeffs = vec![S::zero(); (high - low + 1) as usize];
            for (e, v) in terms {
                coeffs[(e - low) as usize] = v;
            }
            LaurentJet::new(coord, low, coeffs, MAX_GEN_TRUNC)
        };
        jets.push(jet);
    }
    MultiJet::new(jets)
}

pub fn format_jet_literal<S: Scalar>(jet: &MultiJet<S>) -> JetLiteral {
    let mut out = Vec::new();
    for b in 0..jet.branch_count() {
        let branch = jet.branch(b);
        let mut map = BTreeMap::new();
        if let Some(ord) = branch.ord() {
            for e in ord..branch.trunc().min(MAX_GEN_TRUNC) {
                let c = branch.coeff(e).expect("inside window");
                if !c.is_exactly_zero() {
                    map.insert(e.to_string(), c.format_literal());
                }
            }
        }
        out.push(map);
    }
    out
}

/// The loaded curve plus its named divisors.
#[derive(Debug)]
pub struct LoadedCurve<S: Scalar> {
    pub curve: RationalSingularCurve<S>,
    pub divisors: BTreeMap<String, GeneralisedDivisor<S>>,
}

pub fn load_curve<S: Scalar>(
    file: &CurveFile,
    tol: &Tolerance,
    trunc_override: Option<i64>,
) -> Result<LoadedCurve<S>> {
    let components: Vec<Component> = file
        .components
        .iter()
        .map(|c| Component { name: c.name.clone() })
        .collect();
    let comp_index = |name: &str| -> Result<usize> {
        components
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::Schema(format!("unknown component `{name}`")))
    };
    let mut points = Vec::new();
    for p in &file.points {
        points.push(NamedPoint {
            name: p.name.clone(),
            component: comp_index(&p.component)?,
            at: parse_point::<S>(&p.value)?,
        });
    }
    let point_index = |name: &str| -> Result<usize> {
        points
            .iter()
            .position(|p: &NamedPoint<S>| p.name == name)
            .ok_or_else(|| Error::Schema(format!("unknown point `{name}`")))
    };
    let mut singularities = Vec::new();
    for s in &file.singularities {
        let preimages = s
            .preimages
            .iter()
            .map(|n| point_index(n))
            .collect::<Result<Vec<_>>>()?;
        let branches = preimages.len();
        let coords: Vec<String> = (0..branches).map(|i| format!("t{i}")).collect();
        let ring = match &s.ring {
            RingSpec::FromDivisor { multiplicities } => {
                LocalRingStalk::from_divisor(multiplicities, trunc_override, tol)?
            }
            RingSpec::Span { generators } => {
                let gens = generators
                    .iter()
                    .map(|g| parse_jet_literal::<S>(g, &coords))
                    .collect::<Result<Vec<_>>>()?;
                let ambient =
                    AmbientStalk::with_coords(coords.clone(), trunc_override.unwrap_or(6));
                LocalRingStalk::subalgebra_closure(&ambient, &gens, tol)?
            }
            RingSpec::Full => {
                let ambient =
                    AmbientStalk::with_coords(coords.clone(), trunc_override.unwrap_or(4));
                LocalRingStalk::full(ambient, tol)
            }
        };
        singularities.push(Singularity {
            name: s.name.clone(),
            preimages,
            ring,
        });
    }
    let curve = RationalSingularCurve::new(components, points, singularities)?;
    let mut divisors = BTreeMap::new();
    for (name, spec) in &file.divisors {
        let mut regular = Vec::new();
        for r in &spec.regular_part {
            regular.push((curve.point_id(&r.point)?, r.mult));
        }
        let mut stalks = BTreeMap::new();
        for (sing_name, st) in &spec.stalks {
            let si = curve
                .singularities
                .iter()
                .position(|s| &s.name == sing_name)
                .ok_or_else(|| Error::Schema(format!("unknown singularity `{sing_name}`")))?;
            let ring = &curve.singularities[si].ring;
            let gens = st
                .generators
                .iter()
                .map(|g| parse_jet_literal::<S>(g, ring.coords()))
                .collect::<Result<Vec<_>>>()?;
            stalks.insert(si, DivisorStalk::module_closure(ring, &gens)?);
        }
        let div = GeneralisedDivisor { regular, stalks };
        div.validate(&curve)?;
        divisors.insert(name.clone(), div);
    }
    Ok(LoadedCurve { curve, divisors })
}

/// Emits a curve (with divisors) back to the file format.
pub fn emit_curve<S: Scalar>(
    curve: &RationalSingularCurve<S>,
    divisors: &BTreeMap<String, GeneralisedDivisor<S>>,
) -> CurveFile {
    let components = curve
        .components
        .iter()
        .map(|c| ComponentSpec { name: c.name.clone() })
        .collect();
    let points = curve
        .points
        .iter()
        .map(|p| PointSpec {
            name: p.name.clone(),
            component: curve.components[p.component].name.clone(),
            value: format_point(&p.at),
        })
        .collect();
    let singularities = curve
        .singularities
        .iter()
        .map(|s| SingularitySpec {
            name: s.name.clone(),
            preimages: s
                .preimages
                .iter()
                .map(|&p| curve.points[p].name.clone())
                .collect(),
            ring: match s.ring.recipe() {
                RingRecipe::FromDivisor(m) => RingSpec::FromDivisor {
                    multiplicities: m.clone(),
                },
                RingRecipe::Full => RingSpec::Full,
                RingRecipe::Span(gens) => RingSpec::Span {
                    generators: gens.iter().map(format_jet_literal).collect(),
                },
            },
        })
        .collect();
    let mut divisor_specs = BTreeMap::new();
    for (name, div) in divisors {
        let regular_part = div
            .regular
            .iter()
            .map(|&(p, mult)| RegularPartSpec {
                point: curve.points[p].name.clone(),
                mult,
            })
            .collect();
        let mut stalks = BTreeMap::new();
        for (&si, stalk) in &div.stalks {
            stalks.insert(
                curve.singularities[si].name.clone(),
                StalkSpec {
                    generators: stalk.generators().iter().map(format_jet_literal).collect(),
                },
            );
        }
        divisor_specs.insert(
            name.clone(),
            DivisorSpec {
                regular_part,
                stalks,
            },
        );
    }
    CurveFile {
        schema: SCHEMA.into(),
        components,
        points,
        singularities,
        divisors: divisor_specs,
    }
}

/// Renders a JSON report as aligned plain text with a fixed section order.
pub fn render_text(value: &Value) -> String {
    let mut out = String::new();
    render_value(value, 0, &mut out);
    out
}

fn render_value(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_value(v, indent + 1, out);
                    }
                    other => out.push_str(&format!("{pad}{k}: {}\n", scalar_text(other))),
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match item {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}-\n"));
                        render_value(item, indent + 1, out);
                    }
                    other => out.push_str(&format!("{pad}- {}\n", scalar_text(other))),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar_text(other))),
    }
}

fn scalar_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactScalar;

    #[test]
    fn curve_file_round_trip() {
        let text = r#"{
            "schema": "singcurve/1",
            "components": [{"name": "w"}],
            "points": [
                {"name": "p0", "component": "w", "value": "0"},
                {"name": "pinf", "component": "w", "value": "inf"},
                {"name": "p2", "component": "w", "value": "2"}
            ],
            "singularities": [
                {"name": "q", "preimages": ["p0", "pinf"],
                 "ring": {"type": "from_divisor", "multiplicities": [1, 1]}}
            ],
            "divisors": {
                "D": {"regular_part": [{"point": "p2", "mult": 1}], "stalks": {}}
            }
        }"#;
        let file = parse_curve_file(text).unwrap();
        let loaded = load_curve::<ExactScalar>(&file, &Tolerance::exact(), None).unwrap();
        assert_eq!(loaded.curve.arithmetic_genus(), 1);
        assert_eq!(loaded.divisors.len(), 1);
        let emitted = emit_curve(&loaded.curve, &loaded.divisors);
        let json1 = serde_json::to_string_pretty(&emitted).unwrap();
        let reloaded = load_curve::<ExactScalar>(
            &parse_curve_file(&json1).unwrap(),
            &Tolerance::exact(),
            None,
        )
        .unwrap();
        let json2 = serde_json::to_string_pretty(&emit_curve(&reloaded.curve, &reloaded.divisors))
            .unwrap();
        assert_eq!(json1, json2);
    }

    #[test]
    fn jet_literals_parse_and_format() {
        let coords = vec!["t0".to_string(), "t1".to_string()];
        let lit: JetLiteral = vec![
            BTreeMap::from([("-1".to_string(), "1".to_string())]),
            BTreeMap::from([("0".to_string(), "1/2".to_string())]),
        ];
        let jet = parse_jet_literal::<ExactScalar>(&lit, &coords).unwrap();
        assert_eq!(jet.branch(0).ord(), Some(-1));
        assert_eq!(jet.branch(1).coeff(0).unwrap(), ExactScalar::from_ratio(1, 2));
        let back = format_jet_literal(&jet);
        assert_eq!(back, lit);
    }

    #[test]
    fn schema_violations_are_reported() {
        assert!(parse_curve_file("{\"schema\": \"other/1\"}").is_err());
        let text = r#"{
            "schema": "singcurve/1",
            "components": [{"name": "w"}],
            "points": [{"name": "p0", "component": "nope", "value": "0"}]
        }"#;
        let file = parse_curve_file(text).unwrap();
        let err = load_curve::<ExactScalar>(&file, &Tolerance::exact(), None).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn span_ring_from_file() {
        let text = r#"{
            "schema": "singcurve/1",
            "components": [{"name": "w"}],
            "points": [{"name": "p0", "component": "w", "value": "0"}],
            "singularities": [
                {"name": "q", "preimages": ["p0"],
                 "ring": {"type": "span", "generators": [
                    [{"2": "1"}], [{"3": "1"}]
                 ]}}
            ]
        }"#;
        let file = parse_curve_file(text).unwrap();
        let loaded = load_curve::<ExactScalar>(&file, &Tolerance::exact(), None).unwrap();
        assert_eq!(loaded.curve.singularities[0].ring.delta(), 1);
        assert_eq!(loaded.curve.singularities[0].ring.stability_exponent(), 2);
    }

    #[test]
    fn text_rendering_is_deterministic() {
        let v: Value = serde_json::json!({
            "b": 1,
            "a": {"x": [1, 2], "y": "s"},
        });
        let t1 = render_text(&v);
        let t2 = render_text(&v);
        assert_eq!(t1, t2);
        assert!(t1.contains("b: 1"));
    }
}
