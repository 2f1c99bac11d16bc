use serde_json::Value;
use sphericity::simulate::{gen_gaussian, ModelSpec};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sphericity"));
    c.env_remove(sphericity_cli::W_TABLE_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_model1(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let s = gen_gaussian(&ModelSpec::model1(), n, seed).unwrap();
    let mut text = String::from("x,y,z\n");
    for r in s.rows() {
        text.push_str(&format!("{},{},{}\n", r[0], r[1], r[2]));
    }
    let path = dir.join(format!("model1_{n}_{seed}.csv"));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn estimate_reports_inputs_and_results() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_model1(dir.path(), 200, 1);
    let before = std::fs::read(&data).unwrap();
    let v = json(&run(&["estimate", data.to_str().unwrap(), "--preset", "model1-p3"]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["result"]["n"], 200);
    assert_eq!(v["result"]["p"], 3);
    assert_eq!(v["config"]["bandwidth"]["name"], "model1-p3");
    assert!(v["result"]["grid_selection"]["index"].is_u64());
    let msq = v["result"]["msq"].as_f64().unwrap();
    assert!(msq > 0.3 && msq < 1.8, "{msq}");
    assert_eq!(std::fs::read(&data).unwrap(), before);

    let again = json(&run(&["estimate", data.to_str().unwrap(), "--preset", "model1-p3"]));
    assert_eq!(again, v);
}

#[test]
fn threshold_and_equivalence_test_agree_at_the_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_model1(dir.path(), 150, 2);
    let p = data.to_str().unwrap();
    for method in ["jackknife", "pivotal"] {
        let v = json(&run(&["threshold", p, "--h", "0.6", "--kappa", "40", "--method", method]));
        let d = &v["result"]["thresholds"][0]["threshold"];
        let d_text = d.to_string();
        let at = json(&run(&["test", p, "--h", "0.6", "--kappa", "40", "--method", method, "--hypothesis", "equivalence", "--delta", &d_text]));
        assert_eq!(at["result"]["tests"][0]["reject"], true, "{method} at {d_text}");
        let below = d.as_f64().unwrap() * (1.0 - 1e-9);
        let under = json(&run(&["test", p, "--h", "0.6", "--kappa", "40", "--method", method, "--hypothesis", "equivalence", "--delta", &below.to_string()]));
        assert_eq!(under["result"]["tests"][0]["reject"], false, "{method} below {below}");
    }
}

#[test]
fn zero_row_is_a_data_error_naming_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.csv");
    std::fs::write(&path, "a,b,c\n1,2,3\n0.5,1,0\n0,0,0\n2,2,2\n").unwrap();
    let out = run(&["estimate", path.to_str().unwrap(), "--h", "0.8", "--kappa", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("row 4"), "{msg}");
}

#[test]
fn bad_values_are_located() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nan.csv");
    std::fs::write(&path, "1,2\n3,4\n5,NaN\n").unwrap();
    let out = run(&["estimate", path.to_str().unwrap(), "--h", "0.8", "--kappa", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3, column 2"));

    std::fs::write(&path, "1\n2\n3\n").unwrap();
    assert_eq!(run(&["estimate", path.to_str().unwrap(), "--h", "0.8", "--kappa", "10"]).status.code(), Some(3));
    assert_eq!(run(&["estimate", "/nonexistent/file.csv", "--h", "0.8", "--kappa", "10"]).status.code(), Some(3));
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_model1(dir.path(), 30, 3);
    let p = data.to_str().unwrap();
    let cases: [&[&str]; 6] = [
        &["estimate", p],
        &["estimate", p, "--h", "0.5", "--kappa", "20", "--preset", "model1-p3"],
        &["estimate", p, "--h", "0.5"],
        &["ci", p, "--h", "0.5", "--kappa", "20", "--alpha", "1.5"],
        &["test", p, "--h", "0.5", "--kappa", "20", "--hypothesis", "relevant"],
        &["estimate", p, "--h", "0.5", "--kappa", "20", "--bias-reduce", "maybe"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn quantile_tables_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    for path in [&a, &b] {
        let out = run(&["quantiles", "--seed", "9", "--paths", "20000", "--steps", "500", "--format", "text", "--output", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn default_quantiles_reproduce_the_bundled_table() {
    let out = run(&["quantiles", "--format", "text"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), sphericity::inference::WQuantileTable::bundled().to_text());
}

#[test]
fn table_override_via_environment() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("w.txt");
    let t = run(&["quantiles", "--seed", "4", "--paths", "20000", "--steps", "500", "--format", "text", "--output", table.to_str().unwrap()]);
    assert!(t.status.success());
    let data = write_model1(dir.path(), 60, 4);
    let args = ["ci", data.to_str().unwrap(), "--h", "0.6", "--kappa", "30", "--method", "pivotal"];
    let v = json(&bin().args(args).env(sphericity_cli::W_TABLE_ENV, &table).output().unwrap());
    assert_eq!(v["result"]["w_table"]["seed"], 4);
    assert_eq!(v["result"]["w_table"]["paths"], 20000);
    std::fs::write(&table, "garbage").unwrap();
    assert_eq!(bin().args(args).env(sphericity_cli::W_TABLE_ENV, &table).output().unwrap().status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible_and_echoes_its_config() {
    let args = ["simulate", "--n", "40", "--reps", "100", "--target", "0.967", "--seed", "3", "--threads", "1"];
    let a = json(&run(&args));
    let b = json(&run(&args));
    assert_eq!(a, b);
    let report = &a["result"]["report"];
    assert_eq!(report["seed"], 3);
    assert_eq!(report["config"]["reps"], 100);
    assert_eq!(a["config"]["bandwidth"]["name"], "model1-p3");
    let text = run(&["simulate", "--n", "40", "--reps", "100", "--target", "0.967", "--seed", "3", "--format", "text"]);
    assert!(String::from_utf8(text.stdout).unwrap().contains("coverage"));
}

#[test]
fn exact_test_and_text_output() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_model1(dir.path(), 120, 5);
    let p = data.to_str().unwrap();
    let v = json(&run(&["test", p, "--h", "0.6", "--kappa", "40", "--hypothesis", "exact", "--exact-scaling", "direct"]));
    assert_eq!(v["result"]["tests"][0]["hypothesis"], "ExactSphericity");
    assert_eq!(v["result"]["tests"][0]["reject"], true);
    let out = run(&["estimate", p, "--h", "0.6", "--kappa", "40", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("result.msq ")), "{text}");
}

#[test]
fn diagnose_emits_both_curves() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_model1(dir.path(), 100, 6);
    let v = json(&run(&["diagnose", data.to_str().unwrap(), "--preset", "model1-p3", "--kappa-values", "20,40,80"]));
    assert_eq!(v["result"]["h_curve"].as_array().unwrap().len(), 11);
    let k = v["result"]["kappa_curve"].as_array().unwrap();
    assert_eq!(k.len(), 3);
    assert_eq!(k[1]["kappa"], 40.0);
}

#[test]
fn oracle_routes_run() {
    let v = json(&run(&["oracle", "--model", "spherical", "--p", "2", "--draws", "20000"]));
    let o = &v["result"];
    assert!(o["msq"].as_f64().unwrap().abs() < 4.0 * o["se"].as_f64().unwrap());
    let e = json(&run(&["oracle", "--route", "estimator", "--n", "60", "--reps", "5", "--h", "0.6", "--kappa", "30"]));
    assert_eq!(e["result"]["reps"], 5);
}
