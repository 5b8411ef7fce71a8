use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const P1: &str = r#"{"domain":["x1","x2"],"labels":[0,1],"hypotheses":[[0,0],[0,1]],"loss":"zero_one","marginals":{"uniform":["1/2","1/2"]}}"#;

fn properlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_properlab"))
        .args(args)
        .env_remove("PROPERLAB_CAP")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_accepts_p1() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p1.json", P1);
    let out = properlab(&["validate", &p]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(properlab(&["validate", "/nonexistent/p.json"]).status.code(), Some(1));
    let bad = write(dir.path(), "bad.json", "{not json");
    assert_eq!(properlab(&["validate", &bad]).status.code(), Some(1));
    let nonmetric = write(
        dir.path(),
        "nm.json",
        r#"{"domain":["x1"],"labels":[0,1,2],"hypotheses":[[0]],
            "loss":[["0","1","1/10"],["1","0","1/10"],["1/10","1/10","0"]]}"#,
    );
    let out = properlab(&["validate", &nonmetric]);
    assert_eq!(out.status.code(), Some(2));
    let dup = write(dir.path(), "dup.json", r#"{"domain":["x1"],"labels":[0,1],"hypotheses":[[0],[0]],"loss":"zero_one"}"#);
    assert_eq!(properlab(&["validate", &dup]).status.code(), Some(2));
}

#[test]
fn solve_p1_is_one_eighth_and_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p1.json", P1);
    let s1 = dir.path().join("s1.json");
    let s2 = dir.path().join("s2.json");
    for s in [&s1, &s2] {
        let out = properlab(&["solve", &p, "--marginal", "uniform", "--n", "1", "--out", s.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(&s1).unwrap();
    assert_eq!(a, fs::read(&s2).unwrap());
    let json: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(json["value"], "1/8");
    assert_eq!(json["method"], "exact_lp");
    assert_eq!(json["duality_gap"], "0");
}

#[test]
fn solve_mw_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p1.json", P1);
    let out = properlab(&["solve", &p, "--marginal", "uniform", "--n", "1", "--method", "mw", "--tol", "1e-7"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let v: f64 = json["value"].as_str().unwrap().parse().unwrap();
    assert!((v - 0.125).abs() <= 1e-6);
}

#[test]
fn solve_unknown_marginal_fails() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p1.json", P1);
    let out = properlab(&["solve", &p, "--marginal", "missing", "--n", "1"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn solve_respects_enumeration_cap() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p1.json", P1);
    let out = properlab(&["solve", &p, "--marginal", "uniform", "--n", "3", "--cap", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_properlab"))
        .args(["solve", &p, "--marginal", "uniform", "--n", "3"])
        .env("PROPERLAB_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn certify_passes_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p1.json", P1);
    let s = dir.path().join("s.json");
    let s_str = s.to_str().unwrap();
    assert_eq!(
        properlab(&["solve", &p, "--marginal", "uniform", "--n", "1", "--out", s_str]).status.code(),
        Some(0)
    );
    let csv_path = dir.path().join("c.csv");
    let out = properlab(&["certify", &p, s_str, "--out", csv_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("instance,quantity,lhs,rhs,ratio,verdict,category,note"));
    assert!(csv.contains("p1,game_value,1/8,1/8,,pass,mandatory"));
    assert!(!csv.contains(",fail,"));

    let tampered = fs::read_to_string(&s).unwrap().replacen("\"problem_hash\": \"", "\"problem_hash\": \"0", 1);
    let t = write(dir.path(), "t.json", &tampered);
    assert_eq!(properlab(&["certify", &p, &t]).status.code(), Some(4));

    let wrong_value = fs::read_to_string(&s).unwrap().replace("\"value\": \"1/8\"", "\"value\": \"1/7\"");
    let w = write(dir.path(), "w.json", &wrong_value);
    let out = properlab(&["certify", &p, &w]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("game_value,1/7,1/8"));
}

#[test]
fn corpus_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("corpus");
    let out = properlab(&["corpus", "--count", "3", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["summary.csv", "aggregate.csv", "instance_000/problem.json", "instance_002/certify.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
}
