//! Thin command-line front end over the library: loads the JSON file
//! formats, runs the requested pipeline and prints a report (JSON or
//! aligned text). Exit codes: 0 success, 2 schema error, 3 certification
//! failure, 4 unsupported construct.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use singcurve::baker::{heat_check, BaOutcome, BaProblem};
use singcurve::curve::{
    form_divisor_degree, gorenstein_report, h0, h0_forms, matrix_rank, omega_divisor,
    rr_serre_check, stalk_pairing_matrix, GeneralisedDivisor, RationalSingularCurve,
};
use singcurve::io::{
    load_curve, parse_curve_file, render_text, BakerFile, KricheverFile, MatrixFile,
};
use singcurve::krichever::{
    case_classify, flow_classify, ml_pair_all, ml_solve, preset_exact, preset_kp_numeric,
    MlDistribution, PrincipalPart,
};
use singcurve::middleding::{eigen_curve, endomorphism_ring, phi_check, MatrixCurveSpec};
use singcurve::scalar::format_f64;
use singcurve::{Error, ExactScalar, NumericScalar, Scalar, Tolerance};

#[derive(Parser)]
#[command(name = "singcurve", about = "computer algebra for singular curves", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// Scalar kind for the computation.
    #[arg(long, value_enum, default_value_t = ScalarKind::Exact, global = true)]
    scalar: ScalarKind,
    /// Override the working truncation order of ring stalks.
    #[arg(long, global = true)]
    truncation: Option<i64>,
    /// Seed for randomized generator searches.
    #[arg(long, default_value_t = singcurve::DEFAULT_SEED, global = true)]
    seed: u64,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit the JSON report.
    #[arg(long, global = true)]
    json: bool,
    /// Emit the plain-text report (default).
    #[arg(long, global = true)]
    text: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ScalarKind {
    Exact,
    Numeric,
}

#[derive(Subcommand)]
enum Command {
    /// Per-singularity invariants and curve totals.
    Analyze { curve: PathBuf },
    /// Degrees, classical divisor and freeness of named divisors.
    Divisor {
        curve: PathBuf,
        /// Divisor names (all when omitted).
        names: Vec<String>,
    },
    /// Endomorphism rings and lifts of named divisors.
    Middleding { curve: PathBuf, names: Vec<String> },
    /// Riemann-Roch and Serre duality checks over divisor sweeps.
    Rr {
        curve: PathBuf,
        /// Sweep `point=lo..hi` over regular-part degrees.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Stalk pairing non-degeneracy and the Gorenstein table.
    Serre { curve: PathBuf },
    /// Mittag-Leffler solvability and flow classification.
    Krichever { curve: PathBuf, flows: PathBuf },
    /// Baker-Akhiezer solve, heat check and sample evaluation.
    Baker {
        curve: PathBuf,
        problem: PathBuf,
        /// Also write a CSV grid (time, u, residual).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Spectral curve of a polynomial matrix family.
    Eigencurve { matrix: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let rendered = if cli.opts.json {
                serde_json::to_string_pretty(&report).expect("serializable") + "\n"
            } else {
                render_text(&report)
            };
            match &cli.opts.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, rendered) {
                        eprintln!("error: {e}");
                        return ExitCode::from(1);
                    }
                }
                None => {
                    print!("{rendered}");
                    let _ = std::io::stdout().flush();
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Schema(_) | Error::Parse(_) | Error::MalformedPoint(_) => 2,
        Error::TruncationTooSmall(_) | Error::NotCertified(_) | Error::SeparatesBranches => 3,
        Error::Unsupported(_) => 4,
        _ => 1,
    }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<Value, Error> {
    match &cli.command {
        Command::Analyze { curve } => with_exact(cli, curve, |loaded| analyze_report(&loaded.curve)),
        Command::Divisor { curve, names } => with_exact(cli, curve, |loaded| {
            divisor_report(&loaded.curve, &loaded.divisors, names, cli.opts.seed)
        }),
        Command::Middleding { curve, names } => with_exact(cli, curve, |loaded| {
            middleding_report(&loaded.curve, &loaded.divisors, names)
        }),
        Command::Rr { curve, sweep } => with_exact(cli, curve, |loaded| {
            rr_report(&loaded.curve, &loaded.divisors, sweep.as_deref())
        }),
        Command::Serre { curve } => with_exact(cli, curve, |loaded| serre_report(&loaded.curve)),
        Command::Krichever { curve, flows } => {
            let file = parse_curve_file(&read(curve)?)?;
            let flow_file: KricheverFile =
                serde_json::from_str(&read(flows)?).map_err(|e| Error::Schema(format!("{e}")))?;
            match cli.opts.scalar {
                ScalarKind::Exact => {
                    let loaded =
                        load_curve::<ExactScalar>(&file, &Tolerance::exact(), cli.opts.truncation)?;
                    krichever_report_exact(&loaded.curve, &flow_file)
                }
                ScalarKind::Numeric => {
                    let loaded = load_curve::<NumericScalar>(
                        &file,
                        &Tolerance::default_rank(),
                        cli.opts.truncation,
                    )?;
                    krichever_report_numeric(&loaded.curve, &flow_file)
                }
            }
        }
        Command::Baker { curve, problem, csv } => {
            let file = parse_curve_file(&read(curve)?)?;
            let spec: BakerFile =
                serde_json::from_str(&read(problem)?).map_err(|e| Error::Schema(format!("{e}")))?;
            let loaded =
                load_curve::<ExactScalar>(&file, &Tolerance::exact(), cli.opts.truncation)?;
            baker_report(&loaded.curve, &loaded.divisors, &spec, csv.as_ref())
        }
        Command::Eigencurve { matrix } => {
            let spec: MatrixFile =
                serde_json::from_str(&read(matrix)?).map_err(|e| Error::Schema(format!("{e}")))?;
            eigencurve_report(&spec)
        }
    }
}

fn with_exact(
    cli: &Cli,
    curve: &PathBuf,
    f: impl Fn(&singcurve::io::LoadedCurve<ExactScalar>) -> Result<Value, Error>,
) -> Result<Value, Error> {
    let file = parse_curve_file(&read(curve)?)?;
    match cli.opts.scalar {
        ScalarKind::Exact => {
            let loaded =
                load_curve::<ExactScalar>(&file, &Tolerance::exact(), cli.opts.truncation)?;
            f(&loaded)
        }
        ScalarKind::Numeric => Err(Error::Unsupported(
            "this command runs over the exact kind; the numeric kind is for krichever/baker flows"
                .into(),
        )),
    }
}

fn analyze_report(curve: &RationalSingularCurve<ExactScalar>) -> Result<Value, Error> {
    let mut sings = Vec::new();
    for s in &curve.singularities {
        let axioms = s.ring.check_ring_axioms()?;
        let g = gorenstein_report(&s.ring)?;
        sings.push(json!({
            "name": s.name,
            "branches": s.ring.branches(),
            "delta": g.delta,
            "n_q": g.n_q,
            "stability_exponent": s.ring.stability_exponent(),
            "gorenstein": g.n_q == 2 * g.delta && g.delta > 0,
            "omega_free": g.omega_free,
            "axioms_pass": axioms.all_pass(),
        }));
    }
    Ok(json!({
        "schema": "singcurve/1-report",
        "command": "analyze",
        "curve": {
            "components": curve.components.len(),
            "connected_components": curve.connected_components(),
            "delta": curve.delta(),
            "arithmetic_genus": curve.arithmetic_genus(),
        },
        "singularities": sings,
    }))
}

fn divisor_report(
    curve: &RationalSingularCurve<ExactScalar>,
    divisors: &BTreeMap<String, GeneralisedDivisor<ExactScalar>>,
    names: &[String],
    seed: u64,
) -> Result<Value, Error> {
    let selected: Vec<&String> = if names.is_empty() {
        divisors.keys().collect()
    } else {
        names.iter().collect()
    };
    let mut out = Vec::new();
    for name in selected {
        let div = divisors
            .get(name)
            .ok_or_else(|| Error::Schema(format!("unknown divisor `{name}`")))?;
        let mut stalk_reports = Vec::new();
        for (&si, stalk) in &div.stalks {
            let freeness = stalk.freeness_with_seed(seed)?;
            stalk_reports.push(json!({
                "singularity": curve.singularities[si].name,
                "degree": stalk.degree()?,
                "branch_orders": stalk.branch_orders().iter()
                    .map(|o| o.map(|v| json!(v)).unwrap_or(Value::Null)).collect::<Vec<_>>(),
                "equals_ring": stalk.equals_ring()?,
                "freeness": freeness.describe(),
            }));
        }
        let mut classical = Vec::new();
        for &(p, m) in &div.regular {
            classical.push(json!({"point": curve.points[p].name, "degree": m}));
        }
        for (&si, stalk) in &div.stalks {
            classical.push(json!({
                "point": curve.singularities[si].name,
                "degree": stalk.degree()?,
            }));
        }
        out.push(json!({
            "name": name,
            "degree": div.degree(curve)?,
            "classical_divisor": classical,
            "stalks": stalk_reports,
        }));
    }
    Ok(json!({
        "schema": "singcurve/1-report",
        "command": "divisor",
        "divisors": out,
    }))
}

fn middleding_report(
    curve: &RationalSingularCurve<ExactScalar>,
    divisors: &BTreeMap<String, GeneralisedDivisor<ExactScalar>>,
    names: &[String],
) -> Result<Value, Error> {
    let selected: Vec<&String> = if names.is_empty() {
        divisors.keys().collect()
    } else {
        names.iter().collect()
    };
    let mut out = Vec::new();
    for name in selected {
        let div = divisors
            .get(name)
            .ok_or_else(|| Error::Schema(format!("unknown divisor `{name}`")))?;
        for (&si, stalk) in &div.stalks {
            let md = endomorphism_ring(stalk)?;
            out.push(json!({
                "divisor": name,
                "singularity": curve.singularities[si].name,
                "ring_delta": stalk.ring().delta(),
                "middleding_delta": md.ring_prime.delta(),
                "partition": md.partition,
                "lift_freeness": md.freeness.describe(),
            }));
        }
    }
    Ok(json!({
        "schema": "singcurve/1-report",
        "command": "middleding",
        "results": out,
    }))
}

fn parse_sweep(s: &str) -> Result<(String, i64, i64), Error> {
    let (point, range) = s
        .split_once('=')
        .ok_or_else(|| Error::Schema("sweep must be point=lo..hi".into()))?;
    let (lo, hi) = range
        .split_once("..")
        .ok_or_else(|| Error::Schema("sweep must be point=lo..hi".into()))?;
    Ok((
        point.to_string(),
        lo.parse().map_err(|_| Error::Schema("bad sweep bound".into()))?,
        hi.parse().map_err(|_| Error::Schema("bad sweep bound".into()))?,
    ))
}

fn rr_report(
    curve: &RationalSingularCurve<ExactScalar>,
    divisors: &BTreeMap<String, GeneralisedDivisor<ExactScalar>>,
    sweep: Option<&str>,
) -> Result<Value, Error> {
    let mut instances = Vec::new();
    let mut all_pass = true;
    let mut check = |label: String, div: &GeneralisedDivisor<ExactScalar>| -> Result<(), Error> {
        let r = rr_serre_check(curve, div)?;
        all_pass &= r.all_pass();
        instances.push(json!({
            "divisor": label,
            "h0": r.h0,
            "h0_omega": r.h0_omega,
            "degree": r.degree,
            "genus": r.genus,
            "status": if r.all_pass() { "PASS" } else { "FAIL" },
        }));
        Ok(())
    };
    if let Some(sweep) = sweep {
        let (point, lo, hi) = parse_sweep(sweep)?;
        let pid = curve.point_id(&point)?;
        for k in lo..=hi {
            let div = GeneralisedDivisor::of_regular_part(vec![(pid, k)]);
            check(format!("{k}*{point}"), &div)?;
        }
    }
    for (name, div) in divisors {
        check(name.clone(), div)?;
    }
    let nothing_yet = sweep.is_none() && divisors.is_empty();
    if nothing_yet {
        check("O".into(), &GeneralisedDivisor::trivial())?;
    }
    drop(check);
    Ok(json!({
        "schema": "singcurve/1-report",
        "command": "rr",
        "instances": instances,
        "all_pass": all_pass,
    }))
}

fn serre_report(curve: &RationalSingularCurve<ExactScalar>) -> Result<Value, Error> {
    let tol = Tolerance::exact();
    let mut pairings = Vec::new();
    let mut gorenstein = Vec::new();
    for s in &curve.singularities {
        let m = stalk_pairing_matrix(&s.ring)?;
        let delta = s.ring.delta();
        let rank = matrix_rank(&m, &tol);
        pairings.push(json!({
            "singularity": s.name,
            "delta": delta,
            "pairing_rank": rank,
            "nondegenerate": rank == delta,
        }));
        let g = gorenstein_report(&s.ring)?;
        gorenstein.push(json!({
            "singularity": s.name,
            "delta": g.delta,
            "n_q": g.n_q,
            "bounds_ok": g.bounds_ok,
            "omega_free": g.omega_free,
            "iff_ok": g.iff_ok,
        }));
    }
    let fdiv = omega_divisor(curve, &GeneralisedDivisor::trivial())?;
    let h0_omega = h0_forms(curve, &fdiv)?.dim();
    let h0_triv = h0(curve, &GeneralisedDivisor::trivial())?.dim();
    Ok(json!({
        "schema": "singcurve/1-report",
        "command": "serre",
        "h0_structure": h0_triv,
        "h0_forms": h0_omega,
        "arithmetic_genus": curve.arithmetic_genus(),
        "omega_degree": form_divisor_degree(curve, &fdiv)?,
        "stalk_pairings": pairings,
        "gorenstein": gorenstein,
    }))
}

fn parse_parts<S: Scalar>(file: &KricheverFile) -> Result<Vec<PrincipalPart<S>>, Error> {
    file.parts
        .iter()
        .map(|coeffs| {
            coeffs
                .iter()
                .map(|c| S::parse_literal(c))
                .collect::<Result<Vec<_>, _>>()
                .map(PrincipalPart::new)
        })
        .collect()
}

fn distribution_value<S: Scalar>(
    curve: &RationalSingularCurve<S>,
    marked: &[usize],
    file: &KricheverFile,
    period: &S,
) -> Result<Value, Error> {
    let parts = parse_parts::<S>(file)?;
    let dist = MlDistribution::new(marked.to_vec(), parts)?;
    let pair = ml_pair_all(curve, &dist)?;
    let solution = ml_solve(curve, &dist)?;
    let flow = flow_classify(curve, &dist, period)?;
    Ok(json!({
        "pairing": pair.iter().map(|v| v.format_literal()).collect::<Vec<_>>(),
        "solvable": solution.is_some(),
        "solution": solution.map(|tuple| tuple.iter().enumerate()
            .map(|(ci, f)| f.format_with(&curve.components[ci].name))
            .collect::<Vec<_>>()),
        "flow_class": format!("{:?}", flow.class),
        "gaps": flow.gaps.iter().map(|g| g.format_literal()).collect::<Vec<_>>(),
        "period_tested": period.format_literal(),
    }))
}

fn krichever_report_exact(
    curve: &RationalSingularCurve<ExactScalar>,
    file: &KricheverFile,
) -> Result<Value, Error> {
    let marked: Vec<usize> = file
        .marked
        .iter()
        .map(|n| curve.point_id(n))
        .collect::<Result<Vec<_>, _>>()?;
    let period = match &file.period {
        Some(p) => ExactScalar::parse_literal(p)?,
        None => ExactScalar::one(),
    };
    let mut report = json!({
        "schema": "singcurve/1-report",
        "command": "krichever",
        "kind": "exact",
    });
    let obj = report.as_object_mut().unwrap();
    if !file.parts.is_empty() {
        obj.insert(
            "distribution".into(),
            distribution_value(curve, &marked, file, &period)?,
        );
    }
    if let Some(preset) = &file.preset {
        let (h1, h2) = preset_exact(preset, &marked)?;
        let case = case_classify(curve, &h1, &h2, &period)?;
        obj.insert(
            "preset_classification".into(),
            json!({
                "preset": preset,
                "case": format!("{:?}", case.case),
                "first": {
                    "class": format!("{:?}", case.first.class),
                    "gaps": case.first.gaps.iter().map(|g| g.format_literal()).collect::<Vec<_>>(),
                },
                "second": {
                    "class": format!("{:?}", case.second.class),
                    "gaps": case.second.gaps.iter().map(|g| g.format_literal()).collect::<Vec<_>>(),
                },
            }),
        );
    }
    Ok(report)
}

fn krichever_report_numeric(
    curve: &RationalSingularCurve<NumericScalar>,
    file: &KricheverFile,
) -> Result<Value, Error> {
    let marked: Vec<usize> = file
        .marked
        .iter()
        .map(|n| curve.point_id(n))
        .collect::<Result<Vec<_>, _>>()?;
    let period = match &file.period {
        Some(p) => NumericScalar::parse_literal(p)?,
        None => NumericScalar::new(1.0, 0.0),
    };
    let mut report = json!({
        "schema": "singcurve/1-report",
        "command": "krichever",
        "kind": "numeric",
    });
    let obj = report.as_object_mut().unwrap();
    if !file.parts.is_empty() {
        obj.insert(
            "distribution".into(),
            distribution_value(curve, &marked, file, &period)?,
        );
    }
    if let Some(preset) = &file.preset {
        if preset != "kp" {
            return Err(Error::Unsupported(format!(
                "preset `{preset}` runs over the exact kind"
            )));
        }
        if marked.len() != 1 {
            return Err(Error::Schema("the KP preset marks one point".into()));
        }
        let (h1, h2) = preset_kp_numeric(marked[0])?;
        let case = case_classify(curve, &h1, &h2, &period)?;
        obj.insert(
            "preset_classification".into(),
            json!({
                "preset": preset,
                "case": format!("{:?}", case.case),
                "first": { "class": format!("{:?}", case.first.class) },
                "second": { "class": format!("{:?}", case.second.class) },
            }),
        );
    }
    Ok(report)
}

fn baker_report(
    curve: &RationalSingularCurve<ExactScalar>,
    divisors: &BTreeMap<String, GeneralisedDivisor<ExactScalar>>,
    spec: &BakerFile,
    csv: Option<&PathBuf>,
) -> Result<Value, Error> {
    let divisor = divisors
        .get(&spec.divisor)
        .ok_or_else(|| Error::Schema(format!("unknown divisor `{}`", spec.divisor)))?
        .clone();
    let marked: Vec<usize> = spec
        .marked
        .iter()
        .map(|n| curve.point_id(n))
        .collect::<Result<Vec<_>, _>>()?;
    let n = marked.len();
    let flows: Vec<Vec<PrincipalPart<NumericScalar>>> = spec
        .flows
        .iter()
        .map(|flow| {
            flow.iter()
                .map(|coeffs| {
                    coeffs
                        .iter()
                        .map(|c| NumericScalar::parse_literal(c))
                        .collect::<Result<Vec<_>, _>>()
                        .map(PrincipalPart::new)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let c = match &spec.c {
        Some(rows) => rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| NumericScalar::parse_literal(v))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| NumericScalar::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect(),
    };
    let problem = BaProblem::new(curve.clone(), divisor, marked, flows, c)?;
    let samples: Vec<singcurve::P1Point<NumericScalar>> = spec
        .samples
        .iter()
        .map(|s| {
            Ok(if s == "inf" {
                singcurve::P1Point::Infinity
            } else {
                singcurve::P1Point::Finite(NumericScalar::parse_literal(s)?)
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rows = Vec::new();
    let mut csv_lines =
        vec!["re_t1,im_t1,re_t2,im_t2,re_u,im_u,condition,max_residual".to_string()];
    for time in &spec.times {
        let t: Vec<Complex64> = time
            .iter()
            .map(|v| NumericScalar::parse_literal(v).map(|s| s.0))
            .collect::<Result<Vec<_>, _>>()?;
        match problem.ba_solve(&t)? {
            BaOutcome::InExceptionalSet { sigma_min, sigma_max } => {
                rows.push(json!({
                    "t": time,
                    "status": "exceptional",
                    "sigma_min": format_f64(sigma_min),
                    "sigma_max": format_f64(sigma_max),
                }));
            }
            BaOutcome::Solved(sol) => {
                let mut entry = json!({
                    "t": time,
                    "status": "solved",
                    "sigma_min": format_f64(sol.sigma_min),
                    "condition": format_f64(sol.condition),
                    "system_residual": format_f64(sol.residual),
                });
                if spec.heat_check {
                    let hc = heat_check(&problem, &t, &samples)?;
                    entry.as_object_mut().unwrap().insert(
                        "heat".into(),
                        json!({
                            "u": NumericScalar(hc.u).format_literal(),
                            "max_rel_residual": format_f64(hc.max_rel_residual),
                        }),
                    );
                    if t.len() >= 2 {
                        csv_lines.push(format!(
                            "{},{},{},{},{},{},{},{}",
                            t[0].re,
                            t[0].im,
                            t[1].re,
                            t[1].im,
                            hc.u.re,
                            hc.u.im,
                            hc.condition,
                            hc.max_rel_residual
                        ));
                    }
                }
                if !samples.is_empty() {
                    let mut values = Vec::new();
                    for w in &samples {
                        let v = problem.evaluate(&sol, 0, w)?;
                        values.push(json!(v
                            .iter()
                            .map(|x| NumericScalar(*x).format_literal())
                            .collect::<Vec<_>>()));
                    }
                    entry
                        .as_object_mut()
                        .unwrap()
                        .insert("samples".into(), json!(values));
                }
                rows.push(entry);
            }
        }
    }
    if let Some(path) = csv {
        std::fs::write(path, csv_lines.join("\n") + "\n")
            .map_err(|e| Error::Schema(format!("cannot write csv: {e}")))?;
    }
    Ok(json!({
        "schema": "singcurve/1-report",
        "command": "baker",
        "candidates": problem.candidate_count(),
        "times": rows,
    }))
}

fn eigencurve_report(file: &MatrixFile) -> Result<Value, Error> {
    let var = &file.variable;
    let matrix = file
        .matrix
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| singcurve::parse::parse_poly::<ExactScalar>(e, var))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let branches = file
        .branches
        .iter()
        .map(|b| singcurve::parse::parse_ratfun::<ExactScalar>(b, var))
        .collect::<Result<Vec<_>, _>>()?;
    let linear_form = file
        .linear_form
        .iter()
        .map(|v| ExactScalar::parse_literal(v))
        .collect::<Result<Vec<_>, _>>()?;
    let singular_lambdas = file
        .singular_lambdas
        .iter()
        .map(|v| ExactScalar::parse_literal(v))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = MatrixCurveSpec {
        matrix,
        branches,
        linear_form,
        singular_lambdas,
        var: var.clone(),
    };
    let curve = eigen_curve(spec)?;
    let phi = phi_check(&curve)?;
    let mut stalks = Vec::new();
    for stalk in &curve.stalks {
        let md = endomorphism_ring(&stalk.divisor)?;
        stalks.push(json!({
            "lambda": stalk.lambda.format_literal(),
            "ring_delta": stalk.ring.delta(),
            "divisor_degree": stalk.divisor.degree()?,
            "value_rank": stalk.divisor.preimage_value_rank().ok(),
            "middleding_delta": md.ring_prime.delta(),
            "lift_freeness": md.freeness.describe(),
        }));
    }
    Ok(json!({
        "schema": "singcurve/1-report",
        "command": "eigencurve",
        "psi": curve.psi.iter().map(|branch| branch.iter().map(|f| f.format_with(var)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "phi_check": {
            "eigen_equations": phi.eigen_equations,
            "injective_at_test_point": phi.injective_at_test_point,
            "weierstrass_spans_ring": phi.weierstrass_spans_ring,
        },
        "stalks": stalks,
    }))
}
