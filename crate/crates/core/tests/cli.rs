use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use ahlab::geometry::{make_hyperbolic, make_neck, Dim, ProfileDocument, RadialGrid};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ahlab"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Copies the fixture config into `dir` with report and plot outputs there.
fn config_in(dir: &Path) -> PathBuf {
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(fixture("bumped.json")).unwrap()).unwrap();
    cfg["output"] = serde_json::json!({"report": dir.join("report.json"), "plots": dir.join("plots")});
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn run_writes_a_passing_report_and_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().arg("run").arg(config_in(dir.path())).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    let plots = dir.path().join("plots");
    for f in ["mass_drop.csv", "curvature_profile.csv", "yamabe_profile.csv", "convergence.csv"] {
        assert!(plots.join(f).exists(), "{f}");
    }
    let drop = fs::read_to_string(plots.join("mass_drop.csv")).unwrap();
    let mut lines = drop.lines();
    assert_eq!(lines.next(), Some("s,mu_g,mu_gs,predicted,measured,rel_err"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[5] <= 0.01));
}

#[test]
fn reports_and_csvs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config_in(a.path());
    for out in [a.path(), b.path()] {
        let status = bin().arg("run").arg(&cfg).env("AHLAB_OUTPUT_DIR", out).status().unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for f in ["report.json", "plots/mass_drop.csv", "plots/curvature_profile.csv", "plots/convergence.csv"] {
        let (x, y) = (fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        assert!(x == y, "{f} differs");
        assert!(!x.contains(&b'\r'));
    }
}

#[test]
fn past_horizon_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ads.json");
    fs::write(
        &path,
        r#"{"metric": {"kind": "ads_schwarzschild", "n": 3, "m": 1.0, "t_max": 2.0},
            "grid": {"t_min": 1e-5, "base_intervals": 200, "levels": [0]},
            "cutoff": {"t0": 1e-3, "t1": 4e-3}, "s_values": [0.1]}"#,
    )
    .unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["failure"]["stage"], "geometry");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = fs::read_to_string(fixture("bumped.json")).unwrap().replacen('{', "{\"colour\": 1,", 1);
    fs::write(&path, text).unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn verify_lemma_passes_on_the_fixture() {
    let out = bin().arg("verify-lemma").arg(fixture("bumped.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let run: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(run["reports"].as_array().unwrap().len(), 4);
}

#[test]
fn scan_and_static_verbs_on_profile_files() {
    let dir = tempfile::tempdir().unwrap();
    let dim = Dim::new(3).unwrap();
    let grid = RadialGrid::geometric(1e-3, 2.0, 800).unwrap();
    let neck = dir.path().join("neck.json");
    fs::write(&neck, ProfileDocument::from(&make_neck(dim, &grid, 0.9).unwrap()).to_json()).unwrap();
    let out = bin().arg("scan-horizons").arg(&neck).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let scan: Value = serde_json::from_slice(&out.stdout).unwrap();
    let crossings = scan["crossings"].as_array().unwrap();
    assert_eq!(crossings.len(), 1);
    assert!((crossings[0]["t_star"].as_f64().unwrap() - 0.9).abs() < 1e-6);

    let hyp = dir.path().join("hyp.json");
    fs::write(&hyp, ProfileDocument::from(&make_hyperbolic(dim, &grid)).to_json()).unwrap();
    let out = bin().args(["static-test"]).arg(&hyp).args(["--window", "0.3,1.2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "static");
    let out = bin().args(["static-test"]).arg(&hyp).args(["--window", "0.001,1.2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
