use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(rel)
}

fn xmaint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xmaint"))
        .args(args)
        .env_remove("XMAINT_CONFIG")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_samples_as_json() {
    let out = xmaint(&["analyze", s(&fixture("samples")), "--details"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["kind"], "analyze");
    assert_eq!(v["project"]["projectId"], "samples");
    assert!(v["generatedAt"].is_string());
    assert!(v["configHash"].as_str().unwrap().len() == 64);
}

#[test]
fn empty_directory_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let out = xmaint(&["analyze", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn diagnostics_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ok.c"), "int f(void) { return 1; }\n").unwrap();
    fs::write(dir.path().join("bad.c"), [0x69, 0xff, 0x0a]).unwrap();
    let out = xmaint(&["analyze", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["diagnostics"][0]["file"], "bad.c");
}

#[test]
fn markdown_and_csv_outputs() {
    let md = xmaint(&["analyze", s(&fixture("samples")), "--format", "md"]);
    assert_eq!(md.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&md.stdout).starts_with('#'));
    let csv = xmaint(&["analyze", s(&fixture("samples")), "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.contains(','));
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("r.json");
    let out = xmaint(&["analyze", s(&fixture("samples")), "-o", s(&target)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    serde_json::from_str::<Value>(&fs::read_to_string(target).unwrap()).unwrap();
}

#[test]
fn compare_ranks_projects() {
    let out = xmaint(&[
        "compare",
        s(&fixture("parity/c-family")),
        s(&fixture("parity/python")),
        "--sensitivity",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["composite"]["ranking"].as_array().unwrap().len(), 2);
    assert!(v["sensitivity"]["perturbations"].is_array());
    let md = xmaint(&[
        "compare",
        s(&fixture("parity/c-family")),
        s(&fixture("parity/python")),
        "--format",
        "md",
    ]);
    assert!(String::from_utf8_lossy(&md.stdout).contains("c-family"));
}

#[test]
fn compare_needs_two_paths() {
    let out = xmaint(&["compare", s(&fixture("samples"))]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn snapshot_round_trip() {
    let store = tempfile::tempdir().unwrap();
    let st = s(store.path());
    for label in ["first", "second"] {
        let out = xmaint(&[
            "snapshot",
            "save",
            s(&fixture("samples")),
            "--store",
            st,
            "--label",
            label,
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let list = json(&xmaint(&[
        "snapshot", "list", "--store", st, "--format", "json",
    ]));
    assert_eq!(list.as_array().unwrap().len(), 2);
    let trend = xmaint(&[
        "trend", "samples", "--store", st, "--metric", "totalLoc", "--format", "json",
    ]);
    assert_eq!(trend.status.code(), Some(0));
    let t = json(&trend);
    assert_eq!(t["points"].as_array().unwrap().len(), 2);
    assert_eq!(t["points"][0]["value"], t["points"][1]["value"]);

    let unknown = xmaint(&[
        "trend",
        "samples",
        "--store",
        st,
        "--metric",
        "noSuchMetric",
    ]);
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"duplication": {"min_tokens": 77}}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_xmaint"))
        .args(["analyze", s(&fixture("samples"))])
        .env("XMAINT_CONFIG", &cfg)
        .output()
        .unwrap();
    let v = json(&out);
    assert_eq!(v["effectiveConfig"]["duplication"]["min_tokens"], 77);
    let plain = json(&xmaint(&["analyze", s(&fixture("samples"))]));
    assert_ne!(v["configHash"], plain["configHash"]);
}

#[test]
fn flags_are_echoed() {
    let out = xmaint(&[
        "analyze",
        s(&fixture("samples")),
        "--min-tokens",
        "30",
        "--cost-per-line",
        "12",
        "--exclude",
        "legacy/**",
    ]);
    let v = json(&out);
    let eff = &v["effectiveConfig"];
    assert_eq!(eff["duplication"]["min_tokens"], 30);
    assert_eq!(eff["models"]["sqale"]["cost_per_line_minutes"], 12.0);
    assert!(eff["run"].is_object());
    assert_eq!(v["project"]["profiles"].as_array().unwrap().len(), 2);
}

#[test]
fn listing_profiles_and_rules() {
    let out = xmaint(&["profiles", "list", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for id in ["c-family", "python", "cobol-like"] {
        assert!(text.contains(id));
    }
    let rules = xmaint(&["rules", "list", "--profile", "python"]);
    assert_eq!(rules.status.code(), Some(0));
    let missing = xmaint(&["rules", "list", "--profile", "fortran"]);
    assert_eq!(missing.status.code(), Some(1));
}
