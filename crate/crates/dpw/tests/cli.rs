use dpw::bessel::{self, BranchPoint, EULER_GAMMA};
use dpw::loopcore::CircleLoop;
use num_complex::Complex64 as C;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn dpw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpw")).args(args).env("DPW_THREADS", "1").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_version_and_usage_errors() {
    assert_eq!(code(&dpw(&["--help"])), 0);
    assert_eq!(code(&dpw(&["--version"])), 0);
    assert_eq!(code(&dpw(&[])), 1);
    assert_eq!(code(&dpw(&["frobnicate"])), 1);
    assert_eq!(code(&dpw(&["bessel"])), 1);
    assert_eq!(code(&dpw(&["bessel", "--x", "1,2,3"])), 1);
}

#[test]
fn profile_writes_lines_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.jsonl");
    let o = dpw(&["profile", "--r-min", "0.1", "--r-max", "2", "--points", "40", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lines: Vec<Value> = std::fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 40);
    assert!((lines[0]["x"].as_f64().unwrap() - 0.005).abs() < 1e-15);
    assert!(lines.iter().all(|l| l["u"].as_f64().is_some()));
    let summary = read_json(&out.with_extension("summary.json"));
    assert_eq!(summary["failures"], 0);
    assert_eq!(summary["config"]["command"]["points"], 40);
    assert_eq!(summary["config"]["a"].as_f64().unwrap(), EULER_GAMMA);
    assert!(summary["maxResidual"].as_f64().unwrap() < 1e-3);
}

#[test]
fn profile_rejects_bad_input() {
    let o = dpw(&["profile", "--points", "0"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("points"));
    assert_eq!(code(&dpw(&["profile", "--r-min", "2", "--r-max", "1"])), 1);
    assert_eq!(code(&dpw(&["--a", "-1", "profile"])), 1);
}

#[test]
fn profile_failure_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.jsonl");
    let a = format!("{}", 2.0 * EULER_GAMMA);
    let o = dpw(&["--a", &a, "profile", "--r-min", "0.5", "--r-max", "2", "--points", "6", "--out", path_str(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("error ["), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 6);
    let summary = read_json(&out.with_extension("summary.json"));
    assert!(summary["failures"].as_u64().unwrap() >= 1);
    assert!(text.contains("\"error\""));
}

#[test]
fn surface_is_deterministic_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"surface": {"nr": 3, "ntheta": 7, "rMin": 0.8, "rMax": 1.2}}"#).unwrap();
    let mut objs = Vec::new();
    for k in 0..2 {
        let obj = dir.path().join(format!("s{k}.obj"));
        let o = dpw(&["--config", path_str(&cfg), "surface", "--ntheta", "4", "--theta-min", "-0.4", "--theta-max", "0.4", "--out", path_str(&obj)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        objs.push(std::fs::read(&obj).unwrap());
        let side = read_json(&obj.with_extension("json"));
        // The file sets nr, the flag overrides ntheta.
        assert_eq!(side["nr"], 3);
        assert_eq!(side["ntheta"], 4);
        assert_eq!(side["vertices"], 12);
        assert_eq!(side["faces"], 6);
        assert_eq!(side["config"]["command"]["rMin"].as_f64(), Some(0.8));
        assert_eq!(side["config"]["command"]["thetaMin"].as_f64(), Some(-0.4));
        assert!(side["defects"]["conformality"].as_f64().unwrap() < 1e-4);
    }
    assert_eq!(objs[0], objs[1]);
    let text = String::from_utf8(objs.remove(0)).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 12);
}

#[test]
fn surface_rejects_lambda0_off_the_circle() {
    let o = dpw(&["surface", "--lambda0", "0.5,0.5"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unit circle"));
    assert_eq!(code(&dpw(&["surface", "--H", "0"])), 1);
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"surface": {"grid": 3}}"#).unwrap();
    assert_eq!(code(&dpw(&["--config", path_str(&cfg), "surface"])), 1);
    assert_eq!(code(&dpw(&["--config", "/nonexistent/run.json", "surface"])), 1);
}

#[test]
fn factorize_dumps_loadable_loops() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["rh", "circle"] {
        let out = dir.path().join(format!("{method}.json"));
        let o = dpw(&["factorize", "--r", "0.7", "--method", method, "--out", path_str(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let doc = read_json(&out);
        assert_eq!(doc["method"], method);
        assert!(doc["defects"]["reconstruction"].as_f64().unwrap() < 1e-6);
        assert!(doc["defects"]["unitarity"].as_f64().unwrap() < 1e-6);
        let f = CircleLoop::from_json(&doc["F"]).unwrap();
        assert_eq!(f.n(), 256);
        assert_eq!(doc.get("rh").is_some(), method == "rh");
    }
    let o = dpw(&["factorize", "--r", "0.7", "--method", "rh", "--s-max", "12", "--n-nodes", "402"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["rh"]["nNodes"], 402);
    assert_eq!(doc["config"]["command"]["sMax"].as_f64(), Some(12.0));
}

#[test]
fn factorize_rejects_bad_knobs() {
    assert_eq!(code(&dpw(&["factorize", "--method", "lu"])), 1);
    assert_eq!(code(&dpw(&["factorize", "--n-nodes", "9"])), 1);
    assert_eq!(code(&dpw(&["factorize", "--n-nodes", "400"])), 1);
    assert_eq!(code(&dpw(&["factorize", "--r", "0"])), 1);
    assert_eq!(code(&dpw(&["factorize", "--n", "100"])), 1);
    // The doubled parameter leaves the big cell.
    let a = format!("{}", 2.0 * EULER_GAMMA);
    assert_eq!(code(&dpw(&["--a", &a, "factorize", "--r", "1.5"])), 2);
}

#[test]
fn bessel_matches_the_library() {
    let o = dpw(&["bessel", "--x", "-3,2", "--sheet", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let want = bessel::eval_y0i(BranchPoint::new(C::new(-3.0, 2.0), 1).unwrap());
    let got = C::new(doc["Y0i"][0].as_f64().unwrap(), doc["Y0i"][1].as_f64().unwrap());
    assert_eq!(got, want.y0i);
    assert_eq!(doc["route"], "series");
    let o = dpw(&["bessel", "--x", "30"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["route"], "asymptotic");
    assert!(doc["T1"].is_array());
}

#[test]
fn verify_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = dpw(&["verify", "--only", "bessel,frame", "--report", path_str(&report)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().filter(|l| l.starts_with("PASS")).count(), 4);
    let doc = read_json(&report);
    assert_eq!(doc["checks"].as_array().unwrap().len(), 4);
    // Squeezing every bound by 1e-12 must make something fail.
    assert_eq!(code(&dpw(&["verify", "--only", "2", "--tol-scale", "1e-12"])), 3);
    assert_eq!(code(&dpw(&["verify", "--only", "nope"])), 1);
    assert_eq!(code(&dpw(&["verify", "--tol-scale", "0"])), 1);
    let o = dpw(&["verify", "--only", "monodromy", "--json"]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["checks"][0]["status"], "PASS");
}
