//! End-to-end runs of the `squidsim` binary: exit codes, emitted files,
//! manifest contents, idempotence.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_squidsim"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read_manifest(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Small fast configuration shared by the smoke tests.
fn small_config() -> &'static str {
    r#"{
        "space": {"dim": 24, "pad": 6},
        "sweep": {"phi_min": 0.3, "phi_max": 0.7, "phi_count": 3,
                  "g": [1.0, 1.8], "levels": 2},
        "dynamics": {"dim": 12, "pad": 3, "dt": 1e-3, "steps": 50, "stride": 10,
                     "initial_state": {"kind": "fock", "n": 0}}
    }"#
}

#[test]
fn spectrum_produces_expected_row_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), small_config());
    let out = run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    let data_rows = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("phi,"))
        .count();
    assert_eq!(data_rows, 3 * 2 * 2, "phi_count * g_count * levels");
    let manifest = read_manifest(tmp.path());
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["command"], "spectrum");
}

#[test]
fn validation_failure_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"device":{"capacitance_F": -1}}"#);
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("capacitance_F must be > 0"), "{stderr}");
}

#[test]
fn unknown_config_key_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"device":{"capacitance": 1.0}}"#);
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spiderweb_emits_eight_rows_and_checksums_match() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"space": {"dim": 48, "pad": 12}}"#);
    let out = run(&[
        "spiderweb",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv_path = tmp.path().join("spiderweb.csv");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let rows = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("axis,"))
        .count();
    assert_eq!(rows, 8);
    // manifest checksum matches the file on disk
    let manifest = read_manifest(tmp.path());
    let recorded = manifest["outputs"][0]["sha256"].as_str().unwrap();
    use sha2::Digest;
    let actual = format!("{:x}", sha2::Sha256::digest(std::fs::read(&csv_path).unwrap()));
    assert_eq!(recorded, actual);
}

#[test]
fn lindblads_out_of_window_coupling_reported_in_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"space": {"dim": 16, "pad": 4}, "sweep": {"g": [1.8, 5.0]}}"#,
    );
    let out = run(&[
        "lindblads",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_manifest(tmp.path());
    let completions = manifest["notes"]["completions"].as_array().unwrap();
    let at_5 = completions
        .iter()
        .find(|c| c["g"].as_f64() == Some(5.0))
        .unwrap();
    assert_eq!(at_5["completed"], false);
    assert!(at_5["min_eigenvalue"].as_f64().unwrap() < 0.0);
    let warnings = manifest["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("g=5")));
    // rows exist for the in-window coupling only
    let csv = std::fs::read_to_string(tmp.path().join("lindblads.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2, "two Lindblads at g=1.8, none at g=5");
    assert!(rows.iter().all(|r| r.starts_with("1.8")));
}

#[test]
fn out_of_window_sweep_coupling_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"space": {"dim": 12, "pad": 3},
            "sweep": {"phi_min": 0.5, "phi_max": 0.5, "phi_count": 1, "g": [0.1], "levels": 1}}"#,
    );
    let out = run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let manifest = read_manifest(tmp.path());
    let warnings = manifest["warnings"].as_array().unwrap();
    assert!(
        warnings
            .iter()
            .any(|w| w.as_str().unwrap().contains("outside the completion window")),
        "missing g-range warning: {warnings:?}"
    );
}

#[test]
fn evolve_writes_both_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), small_config());
    let out = run(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for name in ["trajectory_bm.csv", "trajectory_lindblad.csv"] {
        let csv = std::fs::read_to_string(tmp.path().join(name)).unwrap();
        assert!(csv.starts_with("t,trace_dev,herm_defect,min_eig,energy"));
        assert_eq!(csv.lines().count(), 51, "{name}: 50 steps + header");
    }
    let manifest = read_manifest(tmp.path());
    assert!(manifest["notes"]["lindblad_stays_above_minus_1e-6"]
        .as_bool()
        .unwrap());
}

#[test]
fn seedless_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), small_config());
    let outdir = tmp.path().join("run");
    let mut dumps: Vec<Vec<u8>> = Vec::new();
    for _ in 0..2 {
        let out = run(&[
            "susceptibility",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            outdir.to_str().unwrap(),
            "--seedless",
            "--threads",
            "2",
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let mut all = std::fs::read(outdir.join("susceptibility.csv")).unwrap();
        all.extend(std::fs::read(outdir.join("manifest.json")).unwrap());
        dumps.push(all);
    }
    assert_eq!(dumps[0], dumps[1], "seedless reruns differ");
}

#[test]
fn numerical_failure_exits_three_with_flagged_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    // absurd time step makes the integration diverge
    let cfg = write_config(
        tmp.path(),
        r#"{"dynamics": {"dim": 8, "pad": 2, "dt": 10.0, "steps": 100, "stride": 10,
                         "initial_state": {"kind": "fock", "n": 0}}}"#,
    );
    let out = run(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("numerical failure"), "{stderr}");
    let manifest = read_manifest(tmp.path());
    assert!(manifest["status"].as_str().unwrap().starts_with("error"));
}

#[test]
fn dim_flag_overrides_space() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), small_config());
    let out = run(&[
        "spiderweb",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
        "--dim",
        "32",
    ]);
    assert!(out.status.success());
    let manifest = read_manifest(tmp.path());
    assert_eq!(manifest["config"]["space"]["dim"], 32);
}

#[test]
fn defaults_are_echoed_in_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), small_config());
    let out = run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let manifest = read_manifest(tmp.path());
    let defaults: Vec<String> = manifest["defaults_applied"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    // device block omitted entirely -> all its fields defaulted
    assert!(defaults.contains(&"device.capacitance_F".to_string()));
    assert!(defaults.contains(&"sweep.fd_step".to_string()));
    // derived params present
    assert!(manifest["derived_params"]["omega0_rad_per_s"].as_f64().unwrap() > 0.0);
}
