//! End-to-end tests of the command-line tool: exit-code discipline, output
//! artifacts, and the certification verdict on the bundled problem specs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_bloch")
}

fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../specs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(exe()).args(args).output().expect("run bloch")
}

#[test]
fn validate_accepts_every_bundled_spec() {
    for name in ["free_1d.json", "free_2d.json", "mathieu_q1.json", "mathieu_q01.json"] {
        let out = run(&["validate", "--spec", spec_path(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name} failed validation: {out:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("sha256"), "summary should echo the spec hash");
    }
}

#[test]
fn certify_passes_on_free_operator_at_the_degenerate_point() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("free.json");
    let out = run(&[
        "certify",
        "--spec",
        spec_path("free_1d.json").to_str().unwrap(),
        "--t0",
        "0",
        "--cutoff",
        "16",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "certify failed: {out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    // The crossing point must have been recognized by the band section.
    assert_eq!(report["band_continuity"]["crossing"], true);
}

#[test]
fn certify_passes_on_mathieu_at_a_generic_point() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("mathieu.json");
    let out = run(&[
        "certify",
        "--spec",
        spec_path("mathieu_q1.json").to_str().unwrap(),
        "--t0",
        "0.25",
        "--cutoff",
        "16",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "certify failed: {out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert_eq!(report["band_continuity"]["crossing"], false);

    // The manifest sidecar must exist and is the only artifact carrying a
    // wall clock.
    let manifest_path = dir.path().join("mathieu.json.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert!(manifest["wall_clock_seconds"].as_f64().unwrap() > 0.0);
    assert!(std::fs::read_to_string(&out_path)
        .unwrap()
        .find("wall_clock")
        .is_none());
}

#[test]
fn indefinite_symbol_fails_at_ellipticity_with_certification_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let spec_file = dir.path().join("indefinite.json");
    std::fs::write(
        &spec_file,
        r#"{
            "dimension": 1,
            "m": 1,
            "order_s": 1,
            "lattice_generators": [[6.283185307179586]],
            "principal": [{"alpha": [2], "q": -1.0}]
        }"#,
    )
    .unwrap();
    let out_path = dir.path().join("constants.json");
    for verb in ["constants", "certify"] {
        let mut args = vec![
            verb,
            "--spec",
            spec_file.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ];
        if verb == "certify" {
            args.extend_from_slice(&["--t0", "0.25"]);
        }
        let out = run(&args);
        assert_eq!(
            out.status.code(),
            Some(5),
            "{verb} on an indefinite symbol should exit 5: {out:?}"
        );
        let message = String::from_utf8(out.stderr).unwrap();
        assert!(
            message.contains("degenerate principal symbol"),
            "stderr should name the ellipticity failure, got: {message}"
        );
    }
}

#[test]
fn malformed_json_exits_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let spec_file = dir.path().join("broken.json");
    std::fs::write(&spec_file, "{ not json").unwrap();
    let out = run(&["validate", "--spec", spec_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dimension_mismatch_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("gap.csv");
    let out = run(&[
        "gap-scan",
        "--spec",
        spec_path("free_1d.json").to_str().unwrap(),
        "--t0",
        "0.1,0.2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bands_writes_the_expected_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bands.csv");
    let out = run(&[
        "bands",
        "--spec",
        spec_path("free_1d.json").to_str().unwrap(),
        "--path",
        "-0.5;0.5",
        "--samples",
        "17",
        "--bands",
        "3",
        "--cutoff",
        "8",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "bands failed: {out:?}");
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t_1,band_1,band_2,band_3");
    assert_eq!(lines.len(), 18, "header plus 17 sample rows");
    assert!(dir.path().join("bands.csv.manifest.json").exists());
}

#[test]
fn bands_match_the_free_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bands.csv");
    let out = run(&[
        "bands",
        "--spec",
        spec_path("free_1d.json").to_str().unwrap(),
        "--path",
        "0;0.5",
        "--samples",
        "3",
        "--bands",
        "2",
        "--cutoff",
        "8",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "bands failed: {out:?}");
    let csv = std::fs::read_to_string(&out_path).unwrap();
    for (row, t) in csv.lines().skip(1).zip([0.0_f64, 0.25, 0.5]) {
        let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        // Lowest two values of (n + t)² over integer n.
        let mut oracle: Vec<f64> = (-2_i64..=2).map(|n| (n as f64 + t).powi(2)).collect();
        oracle.sort_by(f64::total_cmp);
        assert!((fields[0] - t).abs() < 1e-15);
        assert!((fields[1] - oracle[0]).abs() < 1e-12, "row {row}");
        assert!((fields[2] - oracle[1]).abs() < 1e-12, "row {row}");
    }
}

#[test]
fn greedy_band_count_is_refused_with_the_trust_rule() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bands.csv");
    let out = run(&[
        "bands",
        "--spec",
        spec_path("free_1d.json").to_str().unwrap(),
        "--path",
        "0;0.5",
        "--samples",
        "3",
        "--bands",
        "2",
        "--cutoff",
        "1.5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let message = String::from_utf8(out.stderr).unwrap();
    assert!(
        message.contains("truncation-trust"),
        "stderr should cite the trust rule, got: {message}"
    );
}

#[test]
fn sample_count_must_fit_the_waypoint_segments() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bands.csv");
    let out = run(&[
        "bands",
        "--spec",
        spec_path("free_1d.json").to_str().unwrap(),
        "--path",
        "-0.5;0.0;0.5",
        "--samples",
        "16",
        "--bands",
        "2",
        "--cutoff",
        "8",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "16 samples cannot split into 2 segments");
}
