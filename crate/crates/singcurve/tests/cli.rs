//! End-to-end checks of the command-line interface: report stability,
//! file round-trips and the exit-code contract.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_singcurve"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8")
}

#[test]
fn analyze_fixture_values() {
    let text = run_ok(&["analyze", fixture("node.json").to_str().unwrap()]);
    assert!(text.contains("delta: 1"));
    assert!(text.contains("arithmetic_genus: 1"));
    assert!(text.contains("gorenstein: true"));

    let text = run_ok(&["analyze", fixture("cusp.json").to_str().unwrap()]);
    assert!(text.contains("delta: 1"));
    assert!(text.contains("arithmetic_genus: 1"));

    let text = run_ok(&["analyze", fixture("three_point.json").to_str().unwrap()]);
    assert!(text.contains("delta: 2"));
    assert!(text.contains("arithmetic_genus: 2"));
    assert!(text.contains("gorenstein: false"));
}

#[test]
fn reports_are_byte_stable_across_truncations() {
    for f in ["node.json", "cusp.json", "three_point.json"] {
        let base = run_ok(&["analyze", fixture(f).to_str().unwrap(), "--json"]);
        let deeper = run_ok(&[
            "analyze",
            fixture(f).to_str().unwrap(),
            "--json",
            "--truncation",
            "9",
        ]);
        assert_eq!(base, deeper, "truncation must not change the report for {f}");
    }
}

#[test]
fn round_trip_through_emission() {
    // load a fixture, emit it, re-ingest, and compare analysis reports
    use singcurve::io::{emit_curve, load_curve, parse_curve_file};
    use singcurve::{ExactScalar, Tolerance};
    let text = std::fs::read_to_string(fixture("cusp.json")).unwrap();
    let file = parse_curve_file(&text).unwrap();
    let loaded = load_curve::<ExactScalar>(&file, &Tolerance::exact(), None).unwrap();
    let emitted = emit_curve(&loaded.curve, &loaded.divisors);
    let tmp = std::env::temp_dir().join("singcurve_roundtrip.json");
    std::fs::write(&tmp, serde_json::to_string_pretty(&emitted).unwrap()).unwrap();
    let a = run_ok(&["analyze", fixture("cusp.json").to_str().unwrap(), "--json"]);
    let b = run_ok(&["analyze", tmp.to_str().unwrap(), "--json"]);
    assert_eq!(a, b);
    let a = run_ok(&["divisor", fixture("cusp.json").to_str().unwrap(), "--json"]);
    let b = run_ok(&["divisor", tmp.to_str().unwrap(), "--json"]);
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    // 0: success
    let out = bin()
        .args(["analyze", fixture("node.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    // 2: schema error
    let bad = std::env::temp_dir().join("singcurve_bad_schema.json");
    std::fs::write(&bad, "{\"schema\": \"other/9\"}").unwrap();
    let out = bin().args(["analyze", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // 3: certification failure (truncation too small for the closure)
    let uncertifiable = std::env::temp_dir().join("singcurve_uncert.json");
    std::fs::write(
        &uncertifiable,
        r#"{
            "schema": "singcurve/1",
            "components": [{"name": "w"}],
            "points": [
                {"name": "p0", "component": "w", "value": "0"},
                {"name": "p1", "component": "w", "value": "1"}
            ],
            "singularities": [
                {"name": "q", "preimages": ["p0", "p1"],
                 "ring": {"type": "span", "generators": [[{"1": "1"}, {}]]}}
            ]
        }"#,
    )
    .unwrap();
    let out = bin()
        .args(["analyze", uncertifiable.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // 4: unsupported construct (periodicity over a cusp curve)
    let flow = std::env::temp_dir().join("singcurve_cusp_flow.json");
    std::fs::write(&flow, r#"{"marked": ["q1"], "parts": [["1"]]}"#).unwrap();
    let out = bin()
        .args([
            "krichever",
            fixture("cusp.json").to_str().unwrap(),
            flow.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn rr_sweep_has_one_pass_line_per_degree() {
    let text = run_ok(&[
        "rr",
        fixture("node.json").to_str().unwrap(),
        "--sweep",
        "p2=-3..5",
    ]);
    let passes = text.matches("status: PASS").count();
    // 9 sweep instances plus the two named divisors in the file
    assert_eq!(passes, 11);
    assert!(text.contains("all_pass: true"));
}

#[test]
fn kdv_preset_classification_is_stable() {
    let a = run_ok(&[
        "krichever",
        fixture("node.json").to_str().unwrap(),
        fixture("kdv_flow.json").to_str().unwrap(),
        "--json",
    ]);
    let b = run_ok(&[
        "krichever",
        fixture("node.json").to_str().unwrap(),
        fixture("kdv_flow.json").to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["preset_classification"]["case"], "Case3");
    assert_eq!(v["distribution"]["flow_class"], "Periodic");
    assert_eq!(v["distribution"]["gaps"][0], "-1");
}

#[test]
fn baker_heat_run_reports_small_residuals() {
    let text = run_ok(&[
        "baker",
        fixture("node.json").to_str().unwrap(),
        fixture("kp_baker.json").to_str().unwrap(),
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for entry in v["times"].as_array().unwrap() {
        assert_eq!(entry["status"], "solved");
        let res: f64 = entry["heat"]["max_rel_residual"]
            .as_str()
            .unwrap()
            .parse()
            .unwrap();
        assert!(res < 1e-9, "residual {res}");
    }
}

#[test]
fn csv_emission() {
    let csv = std::env::temp_dir().join("singcurve_heat.csv");
    run_ok(&[
        "baker",
        fixture("node.json").to_str().unwrap(),
        fixture("kp_baker.json").to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let content = std::fs::read_to_string(&csv).unwrap();
    assert!(content.starts_with("re_t1,im_t1,re_t2,im_t2,re_u,im_u"));
    assert_eq!(content.lines().count(), 4); // header + 3 times
}
