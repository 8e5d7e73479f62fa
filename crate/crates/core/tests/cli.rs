use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stability-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> (Value, i32) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = run(&all);
    let v: Value = serde_json::from_slice(&out.stdout).expect("json output");
    (v, out.status.code().unwrap())
}

fn check_passed(report: &Value, name: &str) -> bool {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))["pass"]
        .as_bool()
        .unwrap()
}

#[test]
fn bundle_two_line_bundles() {
    let path = data("bundle-two.json");
    let (v, code) = run_json(&["--verify", "bundle", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = &v["results"];
    assert_eq!(r["phi_squared"], "1");
    assert_eq!(r["optimal_weights"], serde_json::json!([-1, 0]));
    assert!(check_passed(&v, "sup-psi-equals-phi"));
}

#[test]
fn bundle_single_piece_is_trivial() {
    let out = run(&["bundle", data("bundle-single.json").to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("semistable: trivial bound only"));
}

#[test]
fn malformed_json_exits_nonzero_with_position() {
    let dir = std::env::temp_dir().join(format!("stability-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"pieces\": [\n  {\"rank\": 1,,}\n]}").unwrap();
    let out = run(&["bundle", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn config_segment_oracle() {
    let path = data("segment.json");
    let (v, code) = run_json(&[
        "--verify",
        "config",
        path.to_str().unwrap(),
        "--k-min",
        "1",
        "--k-max",
        "8",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["futaki"], "0");
    assert_eq!(v["results"]["N2^2"], "1/12");
    assert!(check_passed(&v, "np-oracle-p2"));
}

#[test]
fn config_square_corner_is_vacuous() {
    let path = data("square-corner.json");
    let (v, code) = run_json(&["config", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = &v["results"];
    assert_eq!(r["futaki"], "1/6");
    assert_eq!(r["bound_p2"], "vacuous (F >= 0)");
    assert_eq!(r["N2^2 [Q - b0^2/a0]"], "1/18");
    assert_eq!(r["N2^2 [Q - b1^2/a0, not used]"], "-1/6");
    assert_eq!(v["notes"].as_array().unwrap().len(), 1);
}

#[test]
fn config_synthetic_negative_futaki() {
    let path = data("synthetic-futaki.json");
    let (v, code) = run_json(&["config", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = &v["results"];
    assert_eq!(r["futaki"], "-2");
    assert!(r["psi_hat_2"]
        .as_str()
        .unwrap()
        .ends_with("~ 1.000000000000"));
}

#[test]
fn config_rejects_odd_exponent() {
    let out = run(&["config", data("segment.json").to_str().unwrap(), "--p", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn toric_square_ehrhart() {
    let path = data("square-corner.json");
    let (v, code) = run_json(&["--verify", "toric", path.to_str().unwrap(), "--k-max", "10"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["volume"], "1");
    assert!(check_passed(&v, "ehrhart-volume"));
    assert_eq!(v["all_pass"], true);
}

#[test]
fn embed_conic_a() {
    let (v, code) = run_json(&["embed", "conic-a"]);
    assert_eq!(code, 0);
    let fch = v["results"]["fch"].as_f64().unwrap();
    assert!((fch - 1.0 / 6.0).abs() <= 1e-6);
    assert!(check_passed(&v, "monotone"));
}

#[test]
fn embed_round_moment_matrix_vanishes() {
    let (v, code) = run_json(&["embed", "round", "--k-max", "8"]);
    assert_eq!(code, 0);
    assert!(check_passed(&v, "moment-matrix-vanishes"));
}

#[test]
fn embed_perturbed_from_metric_file() {
    let path = data("perturbed-metric.json");
    let (v, code) = run_json(&["embed", "perturbed", "--metric", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(check_passed(&v, "density-decreasing"));
    assert!(check_passed(&v, "moment-bound"));
}

#[test]
fn embed_unknown_name_fails() {
    let out = run(&["embed", "conic-z"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let path = data("square-corner.json");
    let args = [
        "--format",
        "json",
        "config",
        "--p",
        "2,4",
        path.to_str().unwrap(),
    ];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn thread_cap_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_stability-lab"))
        .env("STABILITY_LAB_THREADS", "1")
        .args([
            "--verify",
            "bundle",
            data("bundle-mixed.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("PASS sup-psi-equals-phi"));
}

#[test]
fn failing_verification_sets_exit_code() {
    // Weights in {-1, 0, 1} cannot point along the optimal direction (-6, -1, 4).
    let path = data("bundle-mixed.json");
    let out = run(&["--verify", "bundle", path.to_str().unwrap(), "--bound", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("FAIL sup-psi-equals-phi"));
}

#[test]
fn zero_weight_bound_is_an_input_error() {
    let path = data("bundle-two.json");
    let out = run(&["--verify", "bundle", path.to_str().unwrap(), "--bound", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
