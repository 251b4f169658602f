use std::process::{Command, Output};

fn onesided(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onesided")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn maximal_evaluation() {
    let out = onesided(&["operator-eval", "--op", "maximal-plus", "--function", "indicator(0, 1)", "--x", "-1"]);
    assert!(out.status.success());
    let v = stdout_json(&out)["values"][0]["value"].as_f64().unwrap();
    assert!((v - 0.5).abs() < 0.01, "{v}");
}

#[test]
fn lipschitz_norm_of_square_root() {
    let out = onesided(&["norm", "--function", "power(0.5)", "--kind", "lip", "--alpha", "0.5"]);
    assert!(out.status.success());
    let v = stdout_json(&out)["value"].as_f64().unwrap();
    assert!((0.999..=1.0).contains(&v), "{v}");
}

#[test]
fn bad_input_exits_with_code_two() {
    let out = onesided(&["norm", "--function", "power(0.5", "--kind", "lip"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 9"));
    assert_eq!(onesided(&["--config", "/nonexistent/config.toml", "verify"]).status.code(), Some(2));
    assert_eq!(onesided(&["check-weight", "--weight", "indicator(0, 1)", "--class", "ap"]).status.code(), Some(2));
}

#[test]
fn invalid_kernel_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("k.csv");
    let knots: String = (1..=400).map(|i| format!("{},{}\n", -(i as f64) / 400.0, -400.0 / i as f64)).collect();
    std::fs::write(&table, knots).unwrap();
    let out = onesided(&["validate-kernel", "--table", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["valid"], serde_json::Value::Bool(false));
}

#[test]
fn verify_and_convert() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let json_s = json.to_str().unwrap();
    let out = onesided(&["--config", "demo", "--out", json_s, "verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert!(report.get("wall_time_s").is_none());
    let cases: usize = report["suites"].as_array().unwrap().iter().map(|s| s["cases"].as_array().unwrap().len()).sum();

    let out = onesided(&["--out", csv.to_str().unwrap(), "report-convert", "--input", json_s]);
    assert!(out.status.success());
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), cases + 1);
}
