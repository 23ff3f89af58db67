use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lcc_core::io::{MatrixDoc, PovmDocument};
use lcc_core::lcc::two_level_lcc;
use lcc_core::linalg::{identity, re};
use lcc_core::models::TwoLevelFamily;
use lcc_core::povm::PovmSet;
use lcc_core::qfi::StatePoint;

fn lcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcc"))
        .args(args)
        .output()
        .expect("spawn lcc")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_doc(dir: &Path, name: &str, doc: &PovmDocument) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, doc.to_json().unwrap()).unwrap();
    path
}

fn two_level_point() -> StatePoint {
    StatePoint::evaluate(&TwoLevelFamily::new(1.0).unwrap(), 0.3).unwrap()
}

#[test]
fn catalog_lists_everything() {
    let out = lcc(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["von-neumann", "three-qubit", "meter-lcc", "entangled-lcc", "saturation", "null_limit"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn three_qubit_ratio_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("three-qubit-ratio.csv");
    let out = lcc(&[
        "run",
        "--config",
        path_str(&configs().join("three-qubit-ratio.json")),
        "--out",
        path_str(&out_path),
        "--threads",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    let meta: serde_json::Value = serde_json::from_str(&lines.next().unwrap()[2..]).unwrap();
    assert_eq!(meta["command"], "run");
    assert_eq!(meta["rows"], 41);
    assert_eq!(meta["flagged"], 0);
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(
        lines.next(),
        Some("index,ratio,channel,one_minus_gamma,eta,c,p_check,status")
    );
    assert_eq!(lines.count(), 41);
}

#[test]
fn verify_all_passes() {
    let out = lcc(&["verify", "--config", path_str(&configs().join("verify-all.json")), "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(",suite,")).count(), 11);
    assert!(text.lines().skip(2).all(|l| l.ends_with(",ok")));
}

#[test]
fn corrupted_input_fails_with_completeness_residual() {
    let dir = tempfile::tempdir().unwrap();
    let good = PovmSet::binary(two_level_lcc(0.3, 1.0, 0.25)).unwrap();
    let mut doc = PovmDocument::new(&good, Some(&two_level_point()));
    doc.elements[1].matrix = MatrixDoc::from_matrix(&(identity(2) * re(0.5)));
    let path = write_doc(dir.path(), "corrupted.json", &doc);
    let out = lcc(&["verify", "--input", path_str(&path), "--trials", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("do not sum to identity (residual"), "{stderr}");
}

#[test]
fn null_retained_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    let point = two_level_point();
    let null = PovmSet::binary(point.rho_perp().unwrap()).unwrap();
    let path = write_doc(dir.path(), "null.json", &PovmDocument::new(&null, Some(&point)));
    let out = lcc(&["verify", "--input", path_str(&path), "--trials", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("null retained outcome"));
}

#[test]
fn valid_input_passes() {
    let dir = tempfile::tempdir().unwrap();
    let good = PovmSet::binary(two_level_lcc(0.3, 1.0, 0.25)).unwrap();
    let path = write_doc(dir.path(), "good.json", &PovmDocument::new(&good, Some(&two_level_point())));
    let out = lcc(&["verify", "--input", path_str(&path), "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("typo.json", r#"{"modle": {"name": "two-level"}}"#),
        (
            "unknown-channel.json",
            r#"{"model": {"name": "two-level"}, "channels": [{"name": "teleport"}], "sweep": {"variable": "x", "grid": {"values": [0.1]}}}"#,
        ),
        (
            "mismatch.json",
            r#"{"model": {"name": "two-level"}, "channels": [{"name": "wva"}], "sweep": {"variable": "x", "grid": {"values": [0.1]}}}"#,
        ),
        (
            "empty-grid.json",
            r#"{"model": {"name": "two-level"}, "channels": [{"name": "two-level-lcc"}], "sweep": {"variable": "x", "grid": {"values": []}}}"#,
        ),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let out = lcc(&["run", "--config", path_str(&path)]);
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
    assert_eq!(lcc(&["run"]).status.code(), Some(2));
    assert_eq!(lcc(&["run", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn flagged_rows_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("null.json");
    std::fs::write(
        &path,
        r#"{"model": {"name": "von-neumann"}, "channels": [{"name": "wva", "params": {"theta_star": -2.0943951023931953}}],
            "sweep": {"variable": "x", "grid": {"values": [0.0, 0.5]}}}"#,
    )
    .unwrap();
    let out = lcc(&["run", "--config", path_str(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("error: null retained outcome"));
    assert!(!text.contains("NaN") && !text.contains("inf"));
}
