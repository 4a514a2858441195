//! End-to-end checks of the command-line interface: exit codes, file
//! outputs and cross-run determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coexsim"))
}

const TINY_SCENARIO: &str = r#"
seed = 7
mode = "joint"
lambda_list = [0.5]
n_slots = 6
n_ues = 3

[constellation]
n_sat = 4

[arrays]
gnb_n_az = 4
gnb_n_el = 4
"#;

fn write_tiny(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("tiny.toml");
    std::fs::write(&path, TINY_SCENARIO).unwrap();
    path
}

#[test]
fn validate_accepts_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("ok:"), "unexpected stdout: {stdout}");
}

#[test]
fn validate_rejects_unknown_field_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "frobnicate = true\n").unwrap();
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_rejects_semantic_error_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "epsilon = 2.0\n").unwrap();
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_mode_flag_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--mode", "quantum", "--repeats", "1"])
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    for sub in ["a", "b"] {
        let out = bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .args(["--repeats", "1", "--out-dir"])
            .arg(dir.path().join(sub))
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let read = |sub: &str, name: &str| std::fs::read(dir.path().join(sub).join(name)).unwrap();
    assert_eq!(read("a", "records.csv"), read("b", "records.csv"));
    assert_eq!(read("a", "summary.json"), read("b", "summary.json"));

    let csv = String::from_utf8(read("a", "records.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "slot,ue_id,lambda,p_dbm,gain_db,drss_db,inr_worst_db,flags"
    );
    assert_eq!(lines.count(), 6);

    // Manifest exists and carries the config hash.
    let manifest: serde_json::Value = serde_json::from_slice(&read("a", "manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert!(manifest["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn repeats_write_per_seed_dirs_and_pooled() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--repeats", "2", "--out-dir"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("out/seed_7/records.csv").exists());
    assert!(dir.path().join("out/seed_8/records.csv").exists());
    let pooled: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/pooled.json")).unwrap())
            .unwrap();
    assert_eq!(pooled["n_runs"], 2);
}

#[test]
fn gainmap_and_utility_curve_export() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let out = bin()
        .args(["gainmap", "--config"])
        .arg(&cfg)
        .args([
            "--slot",
            "1",
            "--theta-step",
            "10",
            "--phi-step",
            "10",
            "--out-dir",
        ])
        .arg(dir.path().join("maps"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let map_csv =
        std::fs::read_to_string(dir.path().join("maps/gainmap_slot1_lambda0.5.csv")).unwrap();
    assert!(map_csv.starts_with("theta_deg,phi_deg,gain_db\n"));
    assert!(dir
        .path()
        .join("maps/gainmap_slot1_lambda0.5_markers.json")
        .exists());

    let out = bin()
        .args(["utility-curve", "--config"])
        .arg(&cfg)
        .args(["--slot", "2", "--out-dir"])
        .arg(dir.path().join("curves"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let curve = std::fs::read_to_string(dir.path().join("curves/utility_slot2.csv")).unwrap();
    assert!(curve.starts_with("p_dbm,utility,feasible_flag\n"));
    assert!(curve.lines().count() > 100);
}

#[test]
fn sweep_lambda_writes_keyed_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.toml");
    std::fs::write(
        &path,
        TINY_SCENARIO.replace("lambda_list = [0.5]", "lambda_list = [0.0, 1.0]"),
    )
    .unwrap();
    let out = bin()
        .args(["sweep-lambda", "--config"])
        .arg(&path)
        .arg("--out-dir")
        .arg(dir.path().join("sweep"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let entries: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("sweep/sweep_lambda.json")).unwrap())
            .unwrap();
    assert_eq!(entries[0]["key"], "lambda=0");
    assert_eq!(entries[1]["key"], "lambda=1");
}

#[test]
fn numerical_failure_exits_3_with_slot_index() {
    // Unreachable INR cap with the abort policy: slot 0 fails.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("infeasible.toml");
    std::fs::write(
        &path,
        format!(
            "{TINY_SCENARIO}\n[power_control]\ninr_max_db = -80.0\ninfeasible_policy = \"error\"\n"
        ),
    )
    .unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&path)
        .args([
            "--mode",
            "power_control_only",
            "--repeats",
            "1",
            "--out-dir",
        ])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("slot 0"), "stderr: {stderr}");
}

#[test]
fn slot_out_of_range_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let out = bin()
        .args(["gainmap", "--config"])
        .arg(&cfg)
        .args(["--slot", "99", "--out-dir"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
