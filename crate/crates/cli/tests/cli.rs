use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use dispburgers_cli::{dispatch, EXIT_CHECK, EXIT_CONFIG, EXIT_OK};

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(sub: &str, config: &Path, out: &Path) -> i32 {
    dispatch([
        "dispburgers",
        sub,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

fn summary(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

fn property(out: &Path, name: &str) -> serde_json::Value {
    summary(out)["properties"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == name)
        .unwrap_or_else(|| panic!("no property {name}"))
        .clone()
}

const BO_SMOKE: &str = r#"{
  "equation": {"type": "pure_power", "alpha": 1.0},
  "grid": {"n": 256},
  "time": {"dt": 1e-3, "t_final": 1.0, "record_every": 50},
  "initial": {"kind": "cosine", "amplitude": 0.1},
  "diagnostics": {"s": 1.0, "n0": 64, "every": 1}
}"#;

#[test]
fn simulate_writes_conservation_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bo.json", BO_SMOKE);
    let out = tmp.path().join("run");
    assert_eq!(run("simulate", &cfg, &out), EXIT_OK);
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,mass,hamiltonian,hs_norm,modified_energy,corrector_share,guard_skips"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!((rows.last().unwrap()[0] - 1.0).abs() < 1e-12);
    let (m0, h0) = (rows[0][1], rows[0][2]);
    for r in &rows {
        assert!(((r[1] - m0) / m0).abs() < 1e-10);
        assert!(((r[2] - h0) / h0).abs() < 1e-8);
    }
    assert_eq!(fs::read_to_string(out.join("energies.jsonl")).unwrap().lines().count(), 21);
    assert!(out.join("final.csv").exists());
    assert!(out.join("spec.json").exists());
}

#[test]
fn simulate_resumes_from_a_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let straight = write_config(
        tmp.path(),
        "a.json",
        r#"{"equation": {"alpha": 1.0}, "grid": {"n": 64},
            "time": {"dt": 1e-2, "t_final": 0.4, "record_every": 10},
            "initial": {"kind": "cosine", "amplitude": 0.3},
            "simulate": {"snapshot_every": 1}}"#,
    );
    let half = write_config(
        tmp.path(),
        "b.json",
        r#"{"equation": {"alpha": 1.0}, "grid": {"n": 64},
            "time": {"dt": 1e-2, "t_final": 0.2, "record_every": 10},
            "initial": {"kind": "cosine", "amplitude": 0.3}}"#,
    );
    assert_eq!(run("simulate", &straight, &tmp.path().join("a")), EXIT_OK);
    assert_eq!(run("simulate", &half, &tmp.path().join("b")), EXIT_OK);
    let snap = tmp.path().join("b").join("final.csv");
    let resume = write_config(
        tmp.path(),
        "c.json",
        &format!(
            r#"{{"equation": {{"alpha": 1.0}}, "grid": {{"n": 64}},
                "time": {{"dt": 1e-2, "t_final": 0.4, "record_every": 10}},
                "simulate": {{"resume_from": {:?}, "resume_time": 0.2}}}}"#,
            snap.to_str().unwrap()
        ),
    );
    assert_eq!(run("simulate", &resume, &tmp.path().join("c")), EXIT_OK);
    let a = fs::read_to_string(tmp.path().join("a/final.csv")).unwrap();
    let c = fs::read_to_string(tmp.path().join("c/final.csv")).unwrap();
    assert_eq!(a, c);
    assert_eq!(fs::read_dir(tmp.path().join("a/snapshots")).unwrap().count(), 5);
}

#[test]
fn check_symbol_passes_for_whitham() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "w.json",
        r#"{"equation": {"type": "whitham", "alpha": 0.5, "tau": 1.0}}"#,
    );
    let out = tmp.path().join("w");
    assert_eq!(run("check-symbol", &cfg, &out), EXIT_OK);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["window"][1], 50.0);
}

#[test]
fn missing_alpha_is_a_configuration_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", r#"{"equation": {"type": "pure_power"}}"#);
    let out = tmp.path().join("bad");
    assert_eq!(run("check-resonance", &cfg, &out), EXIT_CONFIG);
    assert!(!out.exists());
}

#[test]
fn binary_reports_position_of_malformed_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", "{\n  \"equation\": {\"alpha\": 1,}\n}");
    let out = Command::new(env!("CARGO_BIN_EXE_dispburgers"))
        .args(["check-symbol", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2 column"), "{err}");
}

#[test]
fn failed_check_exits_two_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "r.json",
        r#"{"equation": {"alpha": 0.5},
            "checks": {"resonance": {"samples": 2000, "max_spread": 1.0}}}"#,
    );
    let out = Command::new(env!("CARGO_BIN_EXE_dispburgers"))
        .args(["check-resonance", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("r"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CHECK));
    assert!(String::from_utf8_lossy(&out.stderr).contains("res2_spread"));
    assert_eq!(summary(&tmp.path().join("r"))["pass"], false);
}

#[test]
fn output_root_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "i.json", r#"{"equation": {"type": "ilw", "alpha": 1.0}}"#);
    let status = Command::new(env!("CARGO_BIN_EXE_dispburgers"))
        .args(["check-symbol", "--config"])
        .arg(&cfg)
        .env("DBL_OUTPUT_DIR", tmp.path().join("root"))
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(EXIT_OK));
    assert!(tmp.path().join("root/check-symbol/summary.json").exists());
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(dispatch(["dispburgers", "frobnicate"]), EXIT_CONFIG);
    assert_eq!(dispatch(["dispburgers", "simulate"]), EXIT_CONFIG);
    assert_eq!(dispatch(["dispburgers", "--help"]), EXIT_OK);
}

#[test]
fn echoed_spec_reproduces_results() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "x.json",
        r#"{"equation": {"alpha": 1.0}, "grid": {"n": 64},
            "time": {"dt": 5e-3, "t_final": 0.5},
            "initial": {"kind": "random_hs", "amplitude": 0.2, "params": {"kmax": 12}, "seed": 4},
            "experiment": {"kind": "xsb"}}"#,
    );
    let first = tmp.path().join("first");
    assert_eq!(run("experiment", &cfg, &first), EXIT_OK);
    let second = tmp.path().join("second");
    assert_eq!(run("experiment", &first.join("spec.json"), &second), EXIT_OK);
    assert_eq!(
        fs::read(first.join("results.csv")).unwrap(),
        fs::read(second.join("results.csv")).unwrap()
    );
    assert_eq!(property(&second, "l2_anchor")["pass"], true);
}

#[test]
fn energy_and_convergence_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "e.json",
        r#"{"equation": {"alpha": 1.0}, "grid": {"n": 128},
            "time": {"t_final": 0.2},
            "initial": {"kind": "cosine", "amplitude": 0.5},
            "diagnostics": {"s": 0.3, "sigma": -0.2, "n0": 64},
            "checks": {"energy": {"fields": 2, "kmax": 40}}}"#,
    );
    let out = tmp.path().join("e");
    assert_eq!(run("check-energy", &cfg, &out), EXIT_OK);
    assert_eq!(property(&out, "difference_coercivity")["pass"], true);
    let out = tmp.path().join("c");
    assert_eq!(run("convergence", &cfg, &out), EXIT_OK);
    let slope = property(&out, "slope")["value"].as_f64().unwrap();
    assert!((3.7..=4.3).contains(&slope), "{slope}");
}
