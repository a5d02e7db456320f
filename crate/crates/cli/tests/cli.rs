use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn crossover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossover")).args(args).output().expect("spawn crossover")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn curve_one_dimension_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = crossover(&[
        "curve", "--d", "1", "--s", "1", "--jd-min", "0.5", "--jd-max", "0.5", "--step", "0.1", "--estimator", "exact1d",
        "--out", path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j_d,chi_d,chi_provenance,j_s_bound"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "0.500000000000");
    assert_eq!(row[2], "exact-closed-form");
    let chi: f64 = row[1].parse().unwrap();
    assert!((chi - 1f64.exp()).abs() < 1e-10);
    let bound: f64 = row[3].parse().unwrap();
    assert!((bound - ((-1f64).exp() / 2.0).atanh()).abs() < 1e-11);
    assert!(lines.next().is_none());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["params"]["d"], 1);
    assert_eq!(manifest["params"]["certified"], true);
    assert_eq!(manifest["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["timestamp_unix"].as_u64().unwrap() > 0);
}

#[test]
fn curve_grid_inclusive_and_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = crossover(&[
        "curve", "--d", "1", "--s", "2", "--jd-min", "0.1", "--jd-max", "0.5", "--step", "0.1", "--estimator", "exact1d",
        "--out", path_str(&out),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(&out).unwrap();
    let bounds: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(bounds.len(), 5);
    assert!(bounds.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn curve_strip_is_flagged_as_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = crossover(&[
        "curve", "--d", "2", "--s", "1", "--jd-min", "0.2", "--jd-max", "0.3", "--step", "0.1", "--estimator", "strip",
        "--width", "3", "--length", "6", "--out", path_str(&out),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("transfer-matrix")));
    assert!(stdout(&o).contains("estimated"));
}

#[test]
fn curve_usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let out = path_str(&out);
    // estimator for the wrong dimension
    let o = crossover(&[
        "curve", "--d", "2", "--s", "1", "--jd-min", "0.1", "--jd-max", "0.2", "--step", "0.1", "--estimator", "exact1d",
        "--out", out,
    ]);
    assert_eq!(code(&o), 2);
    // nonpositive coupling
    let o = crossover(&[
        "curve", "--d", "1", "--s", "1", "--jd-min", "0", "--jd-max", "0.2", "--step", "0.1", "--estimator", "exact1d",
        "--out", out,
    ]);
    assert_eq!(code(&o), 2);
    // strip wider than the cap
    let o = crossover(&[
        "curve", "--d", "2", "--s", "1", "--jd-min", "0.1", "--jd-max", "0.1", "--step", "0.1", "--estimator", "strip",
        "--width", "20", "--length", "40", "--out", out,
    ]);
    assert_eq!(code(&o), 2);
    // unknown flag
    assert_eq!(code(&crossover(&["curve", "--bogus"])), 2);
}

#[test]
fn chi_methods_agree() {
    let o = crossover(&["chi", "--d", "2", "--width", "3", "--length", "4", "--j-d", "0.35", "--method", "spin,currents,transfer"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let values: Vec<f64> = stdout(&o).lines().map(|l| l.split('\t').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 3);
    assert!(values.iter().all(|v| (v - values[0]).abs() < 1e-9 * values[0]));
}

#[test]
fn chi_closed_form_rules() {
    let o = crossover(&["chi", "--d", "1", "--j-d", "0.5", "--method", "closed-form"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("2.71828182846"));
    assert_eq!(code(&crossover(&["chi", "--d", "2", "--j-d", "0.5", "--method", "closed-form"])), 2);
    assert_eq!(code(&crossover(&["chi", "--d", "1", "--n", "3", "--j-d", "0.5", "--method", "closed-form,spin"])), 2);
}

#[test]
fn chi_cap_is_a_usage_error() {
    let o = crossover(&["chi", "--d", "2", "--n", "3", "--j-d", "0.3", "--method", "spin"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn verify_single_instance_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = crossover(&["verify", "--scope", "backbone", "--instance", "four-cycle", "--report", path_str(&report)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["scope"], "backbone");
    assert_eq!(r["failed"], 0);
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 6);
    assert!(checks.iter().all(|c| c["pass"] == true && c["check"] == "backbone-expansion"));
    assert!(dir.path().join("r.json.manifest.json").exists());
}

#[test]
fn verify_small_randomized_run() {
    let o = crossover(&[
        "verify", "--scope", "identities", "--seed", "3", "--random-graphs", "10", "--max-edges", "12",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
}

#[test]
fn verify_unknown_instance_exits_two() {
    assert_eq!(code(&crossover(&["verify", "--scope", "backbone", "--instance", "nope"])), 2);
}

#[test]
fn mc_against_exact_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let args = [
        "mc", "--d", "1", "--s", "1", "--l", "4", "--j-d", "0.3", "--j-s", "0.1", "--sweeps", "1200", "--burn-in", "200",
        "--chains", "8", "--seed", "11", "--exact", "--out", path_str(&out),
    ];
    let first = crossover(&args);
    assert_eq!(code(&first), 0, "{}", stdout(&first));
    let a = fs::read(&out).unwrap();
    let second = crossover(&args);
    assert_eq!(code(&second), 0);
    assert_eq!(a, fs::read(&out).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["config"]["seed"], 11);
    assert!(v["exact"].as_f64().unwrap() > 1.0);
}

#[test]
fn mc_requires_seed_and_valid_config() {
    assert_eq!(code(&crossover(&["mc", "--d", "1", "--s", "1"])), 2);
    assert_eq!(code(&crossover(&["mc", "--d", "1", "--s", "1", "--l", "1", "--seed", "1"])), 2);
    assert_eq!(code(&crossover(&["mc", "--d", "1", "--s", "1", "--sweeps", "10", "--burn-in", "10", "--seed", "1"])), 2);
}

#[test]
fn mc_scan_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = crossover(&[
        "mc", "--d", "1", "--s", "1", "--seed", "5", "--scan-jd", "0.5", "--ls", "4,6", "--sweeps", "300", "--burn-in", "50",
        "--chains", "2", "--out", path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("j_d,j_s,l,proxy,std_error,saturates\n"));
}
