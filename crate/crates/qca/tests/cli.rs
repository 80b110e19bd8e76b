use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn qca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qca"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn simulate_reports_cone_and_entropy() {
    let o = qca(&[
        "simulate", "--s", "2", "--t", "2", "--phi", "3.14159,3.14159", "--theta", "0,1.5708,0",
        "--delta", "0,0,0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["cone_sites"], 13);
    assert!(v["entropy"].as_f64().unwrap() <= 1.0 + 1e-9);
    assert!(v["depth"].as_u64().unwrap() > 0);
    assert_eq!(v["fingerprint"].as_str().unwrap().len(), 64);

    let o = qca(&["simulate", "--s", "2", "--t", "3", "--phi", "0,0", "--theta", "0.3,1,2"]);
    assert_eq!(json(&o)["entropy"], 0.0);

    let o = qca(&["simulate", "--s", "2", "--t", "4", "--phi", "1,1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(qca(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qca(&["simulate", "--s", "2"]).status.code(), Some(2));
    assert_eq!(qca(&["index", "--s", "2", "--phi", "1"]).status.code(), Some(2));
    assert_eq!(qca(&["index", "--rule", "/nonexistent/rule.json"]).status.code(), Some(2));
}

#[test]
fn index_classify_and_verify() {
    assert_eq!(stdout(&qca(&["index", "--s", "2", "--phi", "0,0"])), "1,1");
    assert_eq!(stdout(&qca(&["index", "--s", "2", "--shift=-1,0"])), "2,1");
    assert_eq!(stdout(&qca(&["index", "--s", "1", "--shift", "1"])), "1/2");
    assert_eq!(stdout(&qca(&["index", "--s", "2", "--phi", "1.1,2.3", "--theta", "0.2,0.5,0.9"])), "1,1");

    let v = json(&qca(&["classify", "--s", "2", "--shift", "1,0"]));
    assert_eq!(v["case"], "CASE_I");
    assert_eq!(v["configuration"]["x"], serde_json::json!([1, 0]));
    let v = json(&qca(&["classify", "--s", "2", "--phi", "1.1,2.3", "--theta", "0.2,0.5,0.9"]));
    assert_eq!(v["case"], "CASE_II");
    assert_eq!(v["index"], serde_json::json!(["1/1", "1/1"]));
    assert_eq!(v["checks"]["quadrant_commutation"]["pass"], true);

    let o = qca(&["verify", "--builtin", "cnot"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(json(&o)["verdict"], "FAIL");
    let o = qca(&["verify", "--s", "2", "--phi", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verdict"], "PASS");
}

#[test]
fn verify_accepts_raw_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let n = 8;
    let id: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    std::fs::write(&path, serde_json::json!({ "s": 1, "re": id }).to_string()).unwrap();
    let o = qca(&["verify", "--matrix", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&path, r#"{"s": 1, "re": [[1.0]]}"#).unwrap();
    assert_eq!(qca(&["verify", "--matrix", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn cone_and_circuit_export() {
    let v = json(&qca(&["cone", "--s", "2", "--t", "3"]));
    assert_eq!(v["cone_sites"], 25);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = qca(&[
        "emit-circuit", "--s", "2", "--phi", "3.14159,1", "--extent", "4,4", "--kind", "margolus",
        "--q", "1,-1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let c: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(c["depth"], 2);
    assert_eq!(c["extents"], serde_json::json!([4, 4]));
    assert_eq!(c["circuit"].as_array().unwrap().len(), 2);
}

#[test]
fn config_files_and_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "simulate", "s": 2, "t": 1, "phi": [180, 180], "theta": [0, 90, 0], "degrees": true}"#,
    )
    .unwrap();
    let a = json(&qca(&["--config", cfg.to_str().unwrap()]));
    let b = json(&qca(&[
        "simulate", "--s", "2", "--t", "1", "--phi", "3.141592653589793,3.141592653589793", "--theta",
        "0,1.5707963267948966,0",
    ]));
    assert!((a["entropy"].as_f64().unwrap() - b["entropy"].as_f64().unwrap()).abs() < 1e-12);
    // flags override the file
    let c = json(&qca(&["--config", cfg.to_str().unwrap(), "simulate", "--t", "2"]));
    assert_eq!(c["cone_sites"], 13);
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn sweep_writes_deterministic_csv_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "sweep".to_string(), "--s".into(), "2".into(), "--t".into(), "1".into(), "--resolution".into(),
            "5".into(), "--samples".into(), "10".into(), "--out".into(), p.to_str().unwrap().into(),
        ]
    };
    let run = |p: &Path, extra: &[&str]| {
        let mut v = args(p);
        v.extend(extra.iter().map(|s| s.to_string()));
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        qca(&refs)
    };
    assert_eq!(run(&a, &[]).status.code(), Some(0));
    assert_eq!(run(&b, &[]).status.code(), Some(0));
    assert_eq!(read(&a), read(&b));
    let text = read(&a);
    assert!(text.starts_with("axis1,axis2,s_max,s_min,delta_s,theta1_star,evals\n"));
    assert_eq!(text.lines().count(), 26);
    let side: Value = serde_json::from_str(&read(&qca::sweeps::sidecar_path(&a))).unwrap();
    assert_eq!(side["spec"]["seed"], 0);

    let o = run(&a, &["--resume"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(&a), text);
    assert_eq!(run(&a, &["--resume", "--seed", "5"]).status.code(), Some(2));
}

#[test]
fn clifford_sweep_cross_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cl.csv");
    let o = qca(&["clifford-sweep", "--s", "2", "--t", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["pass"], true);
    assert!(read(&out).lines().next().unwrap().ends_with(",s_clifford"));
}
