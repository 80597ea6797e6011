use std::path::{Path, PathBuf};
use std::process::Command;

use maslov_cli::emit::{report_csv, report_json};
use maslov_cli::problem::Kind;
use maslov_cli::*;
use serde_json::{json, Value};

fn problems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn load(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(problems().join(name)).unwrap()).unwrap()
}

fn resolve_value(v: &Value) -> Result<Resolved, ValidationError> {
    resolve(parse_problem_str(&v.to_string())?, 1.0)
}

fn solve(name: &str) -> Report {
    run(&parse_problem(&problems().join(name), 1.0).unwrap(), &RunOptions::default()).unwrap()
}

fn resolved_json(r: &Resolved) -> String {
    canonical_json(&json!({"problem": r.problem, "defaults": r.defaults}))
}

#[test]
fn minimal_sf_problem_matches_golden_resolution() {
    let r = parse_problem(&problems().join("rotation_sf.json"), 1.0).unwrap();
    assert_eq!(r.problem.kind, Kind::Sf);
    assert_eq!(r.problem.numerics.elements, Some(4));
    assert_eq!(r.problem.numerics.degree, Some(16));
    assert!(r.defaults.contains(&"interval".to_string()));
    let golden = std::fs::read_to_string(data("rotation_sf.resolved.json")).unwrap();
    assert_eq!(resolved_json(&r), golden);
}

#[test]
fn resolution_is_a_fixed_point() {
    let r = parse_problem(&problems().join("rotation_sf.json"), 1.0).unwrap();
    let again = resolve(r.problem.clone(), 1.0).unwrap();
    assert_eq!(again.problem, r.problem);
    assert!(again.defaults.is_empty());
}

#[test]
fn missing_boundary_is_named() {
    let mut v = load("rotation_sf.json");
    v.as_object_mut().unwrap().remove("boundary");
    let e = resolve_value(&v).unwrap_err();
    assert_eq!(e.path, "boundary");
}

#[test]
fn schema_errors_carry_field_paths() {
    let mut v = load("rotation_sf.json");
    v["coefficients"]["B"]["constant"][1] = json!("oops");
    let e = parse_problem_str(&v.to_string()).unwrap_err();
    assert!(e.path.starts_with("coefficients.B"), "{}", e.path);

    let mut v = load("rotation_sf.json");
    v["coefficients"]["B"] = json!({"constant": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]});
    let e = resolve_value(&v).unwrap_err();
    assert_eq!(e.path, "coefficients.B.constant");

    let mut v = load("rotation_sf.json");
    v["numerics"] = json!({"bogus": 1});
    let e = parse_problem_str(&v.to_string()).unwrap_err();
    assert!(e.path.starts_with("numerics"), "{}", e.path);

    let mut v = load("bott_rotation.json");
    v["numerics"]["elements"] = json!(8);
    assert_eq!(resolve_value(&v).unwrap_err().path, "numerics.elements");
}

#[test]
fn shift_order_must_divide_elements_at_parse_time() {
    let mut v = load("shift_domain.json");
    v["numerics"] = json!({"elements": 5});
    let e = resolve_value(&v).unwrap_err();
    assert_eq!(e.path, "numerics.elements");
    assert!(e.message.contains("grid error"));
    // the scaled count is what gets checked
    v["numerics"] = json!({"elements": 3});
    assert!(resolve(parse_problem_str(&v.to_string()).unwrap(), 2.0).is_ok());
}

#[test]
fn brake_reflection_is_exact_on_odd_element_counts() {
    let mut v = load("brake_graph.json");
    v["kind"] = json!("decompose");
    v["numerics"] = json!({"elements": 3});
    let r = run(&resolve_value(&v).unwrap(), &RunOptions::default()).unwrap();
    assert!(r.certification.passed);
    assert_eq!(r.certification.residual, Some(0));
}

#[test]
fn bott_rotation_has_zero_residual() {
    let r = solve("bott_rotation.json");
    assert_eq!(r.certification.residual, Some(0));
    assert!(r.certification.passed);
    assert_eq!(r.result["lhs"], json!(4));
}

#[test]
fn off_diagonal_path_has_sf_minus_one() {
    let r = solve("offdiagonal_sf.json");
    assert_eq!(r.result["sf"], json!(-1));
}

#[test]
fn rotation_family_sf_and_maslov() {
    assert_eq!(solve("rotation_sf.json").result["sf"], json!(-2));
    let m = solve("rotation_maslov.json");
    assert_eq!(m.result["mu"], json!(2));
    assert_eq!(m.certification.residual, Some(0));
}

#[test]
fn verify_axioms_reports_pass_counts() {
    let r = solve("axioms.json");
    let suites = r.result["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 10);
    for s in suites {
        assert_eq!(s["passed"], json!(20), "{s}");
    }
    assert!(r.certification.passed);
}

#[test]
fn json_round_trip_preserves_structure() {
    let r = solve("rotation_maslov.json");
    let text = report_json(&r);
    let back: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back, serde_json::to_value(&r).unwrap());
    assert_eq!(canonical_json(&back), text);
}

#[test]
fn echoed_inputs_reproduce_the_integers() {
    let r = solve("shift_domain.json");
    let echoed: ProblemFile = serde_json::from_value(serde_json::to_value(&r.inputs).unwrap()).unwrap();
    let again = run(&resolve(echoed, 1.0).unwrap(), &RunOptions::default()).unwrap();
    assert_eq!(again.result, r.result);
    assert_eq!(again.certification, r.certification);
    assert_eq!(again.inputs, r.inputs);
    assert!(again.defaults.is_empty());
}

#[test]
fn emitting_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    emit(&solve("brake_graph.json"), Format::Json, &a).unwrap();
    emit(&solve("brake_graph.json"), Format::Json, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    emit(&solve("brake_graph.json"), Format::Json, &a).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn rotation_trace_has_two_eigenvalue_columns() {
    let resolved = parse_problem(&problems().join("rotation_sf.json"), 1.0).unwrap();
    let r = run(&resolved, &RunOptions { trace: Some(11), timing: false }).unwrap();
    let csv = report_csv(&r).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "s,lambda_0,lambda_1");
    assert_eq!(lines.len(), 12);
    for (k, line) in lines[1..].iter().enumerate() {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f.len(), 3);
        let s = k as f64 / 10.0;
        assert!((f[0] - s).abs() < 1e-15);
        // the double eigenvalue nearest zero is −s or 1 − s
        let want = if s <= 0.5 { -s } else { 1.0 - s };
        if (s - 0.5).abs() > 1e-12 {
            assert!((f[1] - want).abs() < 1e-8 && (f[2] - want).abs() < 1e-8, "{line}");
        }
    }
}

#[test]
fn trace_refused_for_kinds_without_a_sweep() {
    let resolved = parse_problem(&problems().join("bott_rotation.json"), 1.0).unwrap();
    let e = run(&resolved, &RunOptions { trace: Some(5), timing: false }).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

fn maslov() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maslov"))
}

#[test]
fn binary_exit_codes() {
    let ok = maslov().arg("run").arg(problems().join("offdiagonal_sf.json")).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["result"]["sf"], json!(-1));

    let dir = tempfile::tempdir().unwrap();
    let mut v = load("rotation_sf.json");
    v.as_object_mut().unwrap().remove("boundary");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let out = dir.path().join("never.json");
    let o = maslov().arg("run").arg(&bad).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["error"]["path"], json!("boundary"));
    assert!(!out.exists());

    // a computation error: singular boundary matrix
    let mut v = load("rotation_sf.json");
    v["boundary"]["P"] = json!([[1, 0], [0, 0]]);
    let sing = dir.path().join("singular.json");
    std::fs::write(&sing, v.to_string()).unwrap();
    let o = maslov().arg("run").arg(&sing).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["error"]["class"], json!("computation"));
}

#[test]
fn binary_verify_directory() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["bott_rotation.json", "brake_separated.json", "offdiagonal_sf.json"] {
        std::fs::copy(problems().join(name), dir.path().join(name)).unwrap();
    }
    let out = dir.path().join("out");
    let o = maslov().arg("verify").arg(dir.path()).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("3/3 problems passed"));
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["bott_rotation.report.json", "brake_separated.report.json", "offdiagonal_sf.report.json"]
    );
}

#[test]
fn grid_scale_multiplies_elements_and_steps() {
    let r = parse_problem(&problems().join("rotation_maslov.json"), 2.0).unwrap();
    assert_eq!(r.problem.numerics.elements, Some(8));
    assert_eq!(r.problem.numerics.steps, Some(800));
}
