use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn onebit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onebit"))
        .args(args)
        .current_dir(cwd)
        .env("ONEBIT_WORKERS", "4")
        .output()
        .expect("spawn onebit")
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> =
        fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    names
}

#[test]
fn fig2_writes_three_curves_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = onebit(&["roc", "--preset", "fig2", "--out", "o", "--trials", "500"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        files_in(&tmp.path().join("o")),
        ["fig2_r0.1.csv", "fig2_r0.3.csv", "fig2_r0.5.csv", "manifest.json"]
    );
    let csv = fs::read_to_string(tmp.path().join("o/fig2_r0.5.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eta,pfa_emp,pd_emp,pfa_theory,pd_theory,pfa_exact,mode"));
    // -0.5 through 19.5
    assert_eq!(lines.count(), 21);
}

#[test]
fn fig3_writes_one_file_per_sensor_count() {
    let tmp = tempfile::tempdir().unwrap();
    let out = onebit(&["roc", "--preset", "fig3", "--out", "o", "--trials", "300"], tmp.path());
    assert!(out.status.success());
    assert_eq!(
        files_in(&tmp.path().join("o")),
        ["fig3_N1.csv", "fig3_N2.csv", "fig3_N3.csv", "manifest.json"]
    );
}

#[test]
fn manifest_replay_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(onebit(&["roc", "--preset", "fig3", "--out", "a", "--trials", "400", "--seed", "0x2a"], tmp.path())
        .status
        .success());
    let replay = onebit(&["roc", "--config", "a/manifest.json", "--out", "b"], tmp.path());
    assert!(replay.status.success(), "{}", String::from_utf8_lossy(&replay.stderr));
    for name in ["fig3_N1.csv", "fig3_N2.csv", "fig3_N3.csv"] {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn json_format_carries_both_theory_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = onebit(&["roc", "--preset", "fig2", "--out", "o", "--trials", "200", "--format", "json"], tmp.path());
    assert!(out.status.success());
    let text = fs::read_to_string(tmp.path().join("o/fig2_r0.3.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let s = doc.to_string();
    assert!(s.contains("consistent") && s.contains("paper"), "{s}");
    let manifest = fs::read_to_string(tmp.path().join("o/manifest.json")).unwrap();
    assert!(manifest.contains("fig2_r0.3.json"));
}

#[test]
fn zero_trials_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = onebit(&["roc", "--preset", "fig2", "--out", "o", "--trials", "0"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
}

#[test]
fn bad_config_is_rejected_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.cfg"), "n = 10\nlag1_covariance = 0.6\n").unwrap();
    let out = onebit(&["roc", "--config", "bad.cfg", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let missing = onebit(&["theory", "--config", "nope.cfg", "--out", "t.csv"], tmp.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn theory_reports_h0_moments_and_negative_variance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = onebit(&["theory", "--preset", "fig3", "--out", "t.csv"], tmp.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(tmp.path().join("t.csv")).unwrap();
    // (n-1)N/2 and (n-1)N/4 for N = 1 and N = 3
    for needle in ["9.5", "4.75", "28.5", "14.25", "NEGATIVE", "OK"] {
        assert!(csv.contains(needle), "missing {needle}");
    }
}

#[test]
fn quick_validation_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = onebit(&["validate", "--quick", "--out", "report.txt"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert!(report.contains("4/4 checks passed"), "{report}");
}
