use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use sipframe_cli::report::TaskResult;
use sipframe_cli::{run, ProblemSpec, Report, RunOptions, Task};
use sipframe_core::Verdict;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sipframe"))
}

fn example_spec() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs/kframe_example.json")
}

fn write_spec(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn sipframe(args: &[&str], spec: &Path) -> Output {
    bin().args(args).arg("--spec").arg(spec).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn real(rows: &[&[f64]]) -> Value {
    json!(rows.iter().map(|r| r.iter().map(|x| json!([x, 0.0])).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn frame_spec() -> Value {
    json!({
        "schema": 1,
        "space": {"dim": 2, "p": "1.5"},
        "family": real(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]),
        "p_d": "3",
        "seed": 11,
        "tolerances": {"restarts": 8}
    })
}

#[test]
fn coordinate_example_verdicts() {
    let o = sipframe(&["certify"], &example_spec());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let c = &v["result"]["certify"];
    assert_eq!(c["frame"]["verdict"], "refuted");
    assert_eq!(c["k_frame"]["verdict"], "k-frame");
    let w = c["frame"]["witness_lower"].as_array().unwrap();
    assert_eq!(w[2], json!([1.0, 0.0]));
    for key in ["a_est", "b_est", "oracle_a", "oracle_b"] {
        let x = c["k_frame"][key].as_f64().unwrap();
        assert!((x - 1.0).abs() < 2e-2, "{key} = {x}");
    }
    assert!(v["notes"][0].as_str().unwrap().contains("convention"));
    assert!(v.get("timing_ms").is_none());
}

#[test]
fn json_report_roundtrips() {
    let spec = ProblemSpec::from_path(&example_spec()).unwrap();
    let r = run(&spec, Task::Certify, &RunOptions::default()).unwrap();
    let text = sipframe_cli::render(&r, sipframe_cli::Format::Json).unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(sipframe_cli::render(&back, sipframe_cli::Format::Json).unwrap(), text);
}

#[test]
fn certify_csv_layout_and_out_file() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "s.json", &frame_spec());
    let out = dir.path().join("r.csv");
    let o = bin()
        .args(["certify", "--format", "csv", "--out"])
        .arg(&out)
        .arg("--spec")
        .arg(&spec)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("direction_index,ratio"));
    assert_eq!(lines.count(), 64);
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let mut empty = frame_spec();
    empty["family"] = json!([]);
    let o = sipframe(&["certify"], &write_spec(&dir, "empty.json", &empty));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at least one member"), "{}", stderr(&o));

    let mut no_seed = frame_spec();
    no_seed.as_object_mut().unwrap().remove("seed");
    let p = write_spec(&dir, "noseed.json", &no_seed);
    assert_eq!(sipframe(&["certify"], &p).status.code(), Some(1));
    assert!(sipframe(&["certify", "--seed", "4"], &p).status.success());

    let mut mismatch = frame_spec();
    mismatch["task"] = json!("perturb");
    let o = sipframe(&["certify"], &write_spec(&dir, "task.json", &mismatch));
    assert_eq!(o.status.code(), Some(1));

    let mut typo = frame_spec();
    typo["famly"] = json!([]);
    assert_eq!(sipframe(&["certify"], &write_spec(&dir, "typo.json", &typo)).status.code(), Some(1));

    let o = sipframe(&["certify", "--restarts", "lots"], &example_spec());
    assert_eq!(o.status.code(), Some(1));
    let o = sipframe(&["certify", "--oracle"], &write_spec(&dir, "big.json", &{
        let mut s = frame_spec();
        s["space"] = json!({"dim": 4, "p": "2"});
        s["family"] = real(&[&[1.0, 0.0, 0.0, 0.0]]);
        s
    }));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reconstruct_task() {
    let mut s = frame_spec();
    s["reconstruct"] = json!({"trials": 20, "functional": [[1.0, 2.0], [-0.5, 0.0]]});
    let spec: ProblemSpec = serde_json::from_value(s).unwrap();
    let r = run(&spec, Task::Reconstruct, &RunOptions::default()).unwrap();
    let TaskResult::Reconstruct(rec) = &r.result else { panic!() };
    assert!(rec.passed && rec.max_residual <= 1e-7);
    assert_eq!(rec.residuals.len(), 20);
    assert_eq!(rec.dual_family.len(), 3);
    assert!(rec.functional.as_ref().unwrap().residual <= 1e-7);

    // the coordinate family is not a frame: reconstruction of f* itself
    // is refused with the kernel witness
    let mut base: Value = serde_json::from_str(&std::fs::read_to_string(example_spec()).unwrap()).unwrap();
    base.as_object_mut().unwrap().remove("operator");
    base.as_object_mut().unwrap().remove("task");
    let dir = TempDir::new().unwrap();
    let o = sipframe(&["reconstruct"], &write_spec(&dir, "p.json", &base));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("witness"), "{}", stderr(&o));
}

#[test]
fn axioms_task_and_csv() {
    let spec: ProblemSpec = serde_json::from_value(json!({
        "schema": 1,
        "seed": 5,
        "axioms": {"exponents": ["5/4", "3"], "draws": 50, "max_dim": 4}
    }))
    .unwrap();
    let r = run(&spec, Task::Axioms, &RunOptions::default()).unwrap();
    let TaskResult::Axioms(a) = &r.result else { panic!() };
    assert!(a.all_passed, "{a:?}");
    let csv = sipframe_cli::render(&r, sipframe_cli::Format::Csv).unwrap();
    assert!(csv.starts_with("p,property,max_violation,passed\n"));
    assert_eq!(csv.lines().count(), 1 + a.checks.len());
}

#[test]
fn perturb_task() {
    let mut s = frame_spec();
    s["space"] = json!({"dim": 2, "p": "2"});
    s["p_d"] = json!("2");
    s["perturb"] = json!({
        "family": real(&[&[1.01, 0.0], &[0.0, 1.01], &[1.0, 1.02]]),
        "alpha": 0.01,
        "beta": 0.0,
        "gamma": 0.05,
        "samples": 10
    });
    let spec: ProblemSpec = serde_json::from_value(s).unwrap();
    let r = run(&spec, Task::Perturb, &RunOptions::default()).unwrap();
    let TaskResult::Perturb(p) = &r.result else { panic!() };
    assert!(p.premise.holds && p.smallness, "{p:?}");
    let c = p.conclusion.as_ref().unwrap();
    assert!(c.passed, "{c:?}");
    assert!(c.pk_frame.is_some());
    let csv = sipframe_cli::render(&r, sipframe_cli::Format::Csv).unwrap();
    assert!(csv.starts_with("trial,lower_ratio,upper_ratio\n"));
    assert_eq!(csv.lines().count(), 11);

    let mut tight: Value = serde_json::to_value(&spec).unwrap();
    tight["perturb"]["gamma"] = json!(0.0);
    let spec: ProblemSpec = serde_json::from_value(tight).unwrap();
    let r = run(&spec, Task::Perturb, &RunOptions::default()).unwrap();
    let TaskResult::Perturb(p) = &r.result else { panic!() };
    assert!(!p.premise.holds && p.conclusion.is_none());
}

fn sample_spec(pattern: Option<Vec<usize>>, operator: &str) -> ProblemSpec {
    let mut sample = json!({
        "features": real(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0]]),
        "points": ["a", "b", "c"],
        "functional": [[0.5, 0.0], [0.0, -2.0]],
        "operator": operator
    });
    if let Some(p) = pattern {
        sample["pattern"] = json!(p);
    }
    serde_json::from_value(json!({
        "schema": 1,
        "space": {"dim": 2, "p": "3"},
        "p_d": "3",
        "seed": 3,
        "tolerances": {"restarts": 8},
        "sample": sample
    }))
    .unwrap()
}

#[test]
fn sample_task() {
    let r = run(&sample_spec(None, "identity"), Task::Sample, &RunOptions::default()).unwrap();
    let TaskResult::Sample(s) = &r.result else { panic!() };
    assert_eq!(s.certification.verdict, Verdict::KFrame);
    assert!(s.residual.unwrap() <= 1e-7);
    assert_eq!(s.points.len(), 3);
    let csv = sipframe_cli::render(&r, sipframe_cli::Format::Csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("point,true_value,reconstructed,abs_error"));
    assert!(lines.next().unwrap().starts_with("a,"));

    let r = run(&sample_spec(Some(vec![2]), "identity"), Task::Sample, &RunOptions::default()).unwrap();
    let TaskResult::Sample(s) = &r.result else { panic!() };
    assert_eq!(s.certification.verdict, Verdict::Refuted);
    assert!(s.reconstructed.is_none());

    let r = run(&sample_spec(Some(vec![2]), "projector"), Task::Sample, &RunOptions::default()).unwrap();
    let TaskResult::Sample(s) = &r.result else { panic!() };
    assert_eq!(s.certification.verdict, Verdict::KFrame);
    assert!(s.residual.unwrap() <= 1e-7);
    assert_eq!(s.pattern, vec!["c".to_string()]);
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "s.json", &frame_spec());
    let a = sipframe(&["certify"], &spec);
    let b = sipframe(&["certify"], &spec);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let t = sipframe(&["certify", "--timing"], &spec);
    let v: Value = serde_json::from_slice(&t.stdout).unwrap();
    assert!(v["timing_ms"].as_f64().is_some());
}
