use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use prolong_cli::report::{DIAGNOSTICS_FILE, EDGES_FILE, SUMMARY_FILE};
use prolong_cli::scenario::exit;

fn prolong(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prolong")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"))
}

fn shipped(name: &str) -> String {
    std::fs::read_to_string(scenario(name)).expect("shipped scenario")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shipped_scenarios_validate() {
    for name in ["circle-c2-in-m4-z4", "tangent-circle-hilbert", "degenerate-split-projection"] {
        let out = prolong(&["validate", s(&scenario(name))]);
        assert_eq!(out.status.code(), Some(exit::SUCCESS), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains(name));
    }
}

#[test]
fn run_writes_three_reports_and_prints_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("tangent");
    let out = prolong(&["run", s(&scenario("tangent-circle-hilbert")), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS));
    for f in [DIAGNOSTICS_FILE, EDGES_FILE, SUMMARY_FILE] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }
    let summary = std::fs::read_to_string(out_dir.join(SUMMARY_FILE)).unwrap();
    assert_eq!(summary.as_bytes(), out.stdout.as_slice());
    let json: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["mode"], "hilbert");

    let diagnostics = std::fs::read_to_string(out_dir.join(DIAGNOSTICS_FILE)).unwrap();
    assert_eq!(diagnostics.lines().count(), 1 + 21 * 21);
    assert!(diagnostics.starts_with("vertex,x,y,distance_to_z,"));
}

#[test]
fn empty_z_is_a_config_error_with_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        shipped("tangent-circle-hilbert").replace("radius = 1.0, half_width = 0.05", "radius = 5.0, half_width = 0.05");
    let config = write_config(dir.path(), &text);
    let out_dir = dir.path().join("reports");
    let out = prolong(&["run", s(&config), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(exit::CONFIG_ERROR));
    assert!(!out_dir.exists(), "a failed validation must not write anything");
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(prolong(&["validate", s(&config)]).status.code(), Some(exit::CONFIG_ERROR));
}

#[test]
fn parse_errors_report_their_location() {
    let dir = tempfile::tempdir().unwrap();
    let text = shipped("tangent-circle-hilbert").replace("rank = 1", "rank = \"one\"");
    let config = write_config(dir.path(), &text);
    let out = prolong(&["run", s(&config), "--out", s(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(exit::CONFIG_ERROR));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
    assert!(!dir.path().join("r").exists());
}

#[test]
fn mismatched_germ_and_mode_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = shipped("circle-c2-in-m4-z4").replace("kind = \"rotated-projection\"", "kind = \"tangent-line\"");
    let config = write_config(dir.path(), &text);
    assert_eq!(prolong(&["validate", s(&config)]).status.code(), Some(exit::CONFIG_ERROR));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = prolong(&["validate", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(exit::CONFIG_ERROR));
}

#[test]
fn degenerate_exit_status_depends_on_strict_mode() {
    let dir = tempfile::tempdir().unwrap();
    let strict = prolong(&["run", s(&scenario("degenerate-split-projection")), "--out", s(&dir.path().join("a"))]);
    assert_eq!(strict.status.code(), Some(exit::DEGENERATE_STRICT));

    let lenient = shipped("degenerate-split-projection").replace("strict = true", "strict = false");
    let config = write_config(dir.path(), &lenient);
    let out = prolong(&["run", s(&config), "--out", s(&dir.path().join("b"))]);
    assert_eq!(out.status.code(), Some(exit::INVARIANT_FAILURE));
    let flagged = prolong(&["run", s(&config), "--strict", "--out", s(&dir.path().join("c"))]);
    assert_eq!(flagged.status.code(), Some(exit::DEGENERATE_STRICT));

    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("b").join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(json["degenerate"], true);
    assert_eq!(json["w_size"], json["z_size"]);
}

#[test]
fn table_germs_resolve_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    // the frame e₁ on both left-side vertices of a 2×2 grid
    let table = r#"[
        {"vertex": 0, "map": {"rows": 2, "cols": 1, "data": [1.0, 0.0]}},
        {"vertex": 2, "map": {"rows": 2, "cols": 1, "data": [1.0, 0.0]}}
    ]"#;
    std::fs::write(dir.path().join("frames.json"), table).unwrap();
    let config = write_config(
        dir.path(),
        r#"
name = "table"
mode = "hilbert"
[base]
nx = 2
ny = 2
box = [0.0, 1.0, 0.0, 1.0]
z = { kind = "sides", sides = ["left"] }
[hilbert]
rank = 1
ambient_dim = 2
[germ]
kind = "table"
path = "frames.json"
"#,
    );
    let out = prolong(&["run", s(&config), "--out", s(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn suite_smoke_run_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.json");
    let out = prolong(&["suite", "--seed", "3", "--trials", "1", "--out", s(&path)]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS));
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["seed"], 3);
    assert_eq!(json["passed"], true);
}

#[test]
fn suite_seed_zero_with_a_hundred_trials_passes() {
    let out = prolong(&["suite", "--seed", "0", "--trials", "100"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<_> =
        json["suites"].as_array().unwrap().iter().filter(|s| s["passed"] != true).map(|s| s["name"].clone()).collect();
    assert!(failed.is_empty(), "failed suites: {failed:?}");
    assert_eq!(out.status.code(), Some(exit::SUCCESS));
}
