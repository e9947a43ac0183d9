use std::fs;
use std::path::{Path, PathBuf};

use chrono::{TimeZone, Utc};
use serde_json::json;
use xmaint_core::analysis::{analyze_path, assess_project, compare_projects, ProjectAnalysis};
use xmaint_core::config::Config;
use xmaint_core::error::DiagnosticKind;
use xmaint_core::report::{
    analyze_report, compare_report, metrics_summary, to_json, without_generated_at,
};
use xmaint_core::snapshot::{NewSnapshot, SnapshotStore};
use xmaint_core::Error;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
}

fn analyze(root: &Path, id: &str, config: &Config) -> xmaint_core::Result<ProjectAnalysis> {
    analyze_path(root, id, config, &config.registry()?)
}

fn write(root: &Path, rel: &str, text: &str) {
    let path = root.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, text).unwrap();
}

#[test]
fn golden_single_python_file() {
    let config = Config::default();
    let a = analyze(&fixture("golden"), "golden", &config).unwrap();
    let m = &a.metrics;
    assert_eq!(
        (m.lines.code, m.lines.comment, m.lines.blank, m.lines.mixed),
        (7, 1, 1, 0)
    );
    assert_eq!(m.comment_ratio, 1.0 / 8.0);
    let u = &a.files[0].units[0];
    assert_eq!(
        (u.unit.name.as_str(), u.unit.start_line, u.unit.end_line),
        ("letter", 3, 9)
    );
    assert_eq!(
        (u.loc, u.cc, u.param_count, u.nesting_depth_max),
        (7, 3, 1, 1)
    );
    // ( : if >= return elif  over  letter score doc 90 "A" 80 "B" "C"
    let h = &u.halstead;
    assert_eq!(
        (h.n1, h.n2, h.total_operators, h.total_operands),
        (6, 8, 11, 10)
    );
    assert!((h.volume - 21.0 * 14f64.log2()).abs() < 1e-9);
    let s = assess_project(
        &a,
        &config.rule_sets(&config.registry().unwrap()).unwrap(),
        &config,
    )
    .unwrap();
    assert_eq!(s.tdr.production_minutes, 7.0 * 30.0);
    assert!(s.violations.is_empty());
}

#[test]
fn paired_fixtures_agree_on_tokens_not_lines() {
    let config = Config::load(&fixture("parity/config.json")).unwrap();
    let c = analyze(&fixture("parity/c-family"), "c", &config).unwrap();
    let py = analyze(&fixture("parity/python"), "py", &config).unwrap();
    let summary = |a: &ProjectAnalysis| -> Vec<(String, usize, usize)> {
        a.files[0]
            .units
            .iter()
            .map(|u| (u.unit.name.clone(), u.cc, u.param_count))
            .collect()
    };
    assert_eq!(summary(&c).len(), 5);
    assert_eq!(summary(&c), summary(&py));
    let (dc, dp) = (&c.duplication, &py.duplication);
    assert!(
        dc.duplicated_token_ratio > 0.3,
        "fixtures must contain real clones"
    );
    assert!((dc.duplicated_token_ratio - dp.duplicated_token_ratio).abs() <= 0.01);
    assert!((dc.duplicated_line_ratio - dp.duplicated_line_ratio).abs() >= 0.05);
}

#[test]
fn mixed_sample_tree() {
    let config = Config::default();
    let a = analyze(&fixture("samples"), "samples", &config).unwrap();
    let paths: Vec<&str> = a.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(
        paths,
        ["legacy/payroll.cbl", "src/queue.c", "src/report.py"]
    );
    let cobol = &a.files[0].units;
    assert_eq!(cobol.len(), 2);
    assert_eq!(
        (
            cobol[0].unit.name.as_str(),
            cobol[0].cc,
            cobol[0].param_count
        ),
        ("COMPUTE-PAY", 2, 2)
    );
    assert!(a.diagnostics.is_empty());
}

#[test]
fn discovery_rules() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write(root, "main.c", "int main(void) { return 0; }\n");
    write(root, ".git/hooks/x.c", "int hook(void) { return 0; }\n");
    write(
        root,
        "node_modules/lib/y.js",
        "function y() { return 1; }\n",
    );
    write(root, "gen/out.c", "int gen(void) { return 0; }\n");
    write(root, "README.md", "# readme\n");
    write(root, "tool.py", "def f():\n    return 1\n");
    let outside = tempfile::tempdir().unwrap();
    write(outside.path(), "ext.c", "int ext(void) { return 0; }\n");
    #[cfg(unix)]
    std::os::unix::fs::symlink(outside.path(), root.join("linked")).unwrap();

    let mut config = Config::default();
    config.discovery.exclude.push("gen/**".into());
    let a = analyze(root, "p", &config).unwrap();
    let paths: Vec<&str> = a.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(paths, ["main.c", "tool.py"]);

    config.discovery.include.push("*.py".into());
    let a = analyze(root, "p", &config).unwrap();
    assert_eq!(a.files.len(), 1);

    let mut forced = Config::default();
    forced.discovery.profile = Some("python".into());
    forced.discovery.include.push("README.md".into());
    let a = analyze(root, "p", &forced).unwrap();
    assert_eq!(a.files[0].profile_id, "python");
}

#[test]
fn empty_and_broken_inputs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        analyze(dir.path(), "p", &Config::default()),
        Err(Error::EmptyProject)
    ));
    assert!(matches!(
        analyze(&dir.path().join("missing"), "p", &Config::default()),
        Err(Error::Io { .. })
    ));
    write(dir.path(), "ok.c", "int f(void) { return \"x; }\n");
    fs::write(dir.path().join("bad.c"), [0x69, 0x6e, 0x74, 0xff, 0x0a]).unwrap();
    let a = analyze(dir.path(), "p", &Config::default()).unwrap();
    let kinds: Vec<(&str, DiagnosticKind)> = a
        .diagnostics
        .iter()
        .map(|d| (d.file.as_str(), d.kind))
        .collect();
    assert!(kinds.contains(&("bad.c", DiagnosticKind::InvalidEncoding)));
    assert!(kinds.contains(&("ok.c", DiagnosticKind::UnterminatedString)));
    assert_eq!(a.files.len(), 1);
}

#[test]
fn repeated_runs_give_identical_reports() {
    let config = Config::default();
    let registry = config.registry().unwrap();
    let report = |at: &str| {
        let a = analyze(&fixture("samples"), "samples", &config).unwrap();
        let s = assess_project(&a, &config.rule_sets(&registry).unwrap(), &config).unwrap();
        to_json(&without_generated_at(
            analyze_report(&a, &s, &config, json!({}), at).unwrap(),
        ))
    };
    assert_eq!(
        report("2026-01-01T00:00:00Z"),
        report("2027-06-30T12:00:00Z")
    );
}

fn loc_project(root: &Path, lines: usize) {
    let text: String = (0..lines).map(|i| format!("v{i} = {i}\n")).collect();
    write(root, "m.py", &text);
}

#[test]
fn volumetry_across_three_projects() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, n) in dirs.iter().zip([10_000, 12_500, 16_000]) {
        loc_project(d.path(), n);
    }
    let config = Config::default();
    let registry = config.registry().unwrap();
    let analyses: Vec<ProjectAnalysis> = dirs
        .iter()
        .zip(["small", "medium", "large"])
        .map(|(d, id)| analyze(d.path(), id, &config).unwrap())
        .collect();
    let cmp = compare_projects(&analyses, &config, &registry, false).unwrap();
    let r = compare_report(&analyses, &cmp, &config, json!({}), "t").unwrap();
    let vol = |id: &str| {
        r["composite"]["ranking"]
            .as_array()
            .unwrap()
            .iter()
            .find(|x| x["projectId"] == id)
            .unwrap()["indicators"]["volumetry"]["mapped"]
            .as_f64()
            .unwrap()
    };
    assert_eq!(
        (vol("small"), vol("medium"), vol("large")),
        (100.0, 50.0, 0.0)
    );
    assert_eq!(r["composite"]["ranking"][0]["projectId"], "small");
}

#[test]
fn double_counting_config_is_rejected() {
    let config: Config =
        serde_json::from_value(json!({ "rules": { "duplication-block": { "enabled": true } } }))
            .unwrap();
    let a = analyze(&fixture("parity/c-family"), "a", &config).unwrap();
    let b = analyze(&fixture("parity/python"), "b", &config).unwrap();
    let err = compare_projects(&[a, b], &config, &config.registry().unwrap(), false).unwrap_err();
    assert!(matches!(&err, Error::SingleCountingViolation(pairs)
        if pairs == &[("duplicationRatio".to_string(), "duplication-block".to_string())]));
    assert!(
        err.to_string().contains("duplicationRatio")
            && err.to_string().contains("duplication-block")
    );
}

fn params_project(root: &Path, wide: usize) {
    let text: String = (0..10)
        .map(|i| {
            if i < wide {
                format!("int f{i}(int a, int b, int c, int d, int e, int g) {{ return a; }}\n")
            } else {
                format!("int f{i}(int a) {{ return a; }}\n")
            }
        })
        .collect();
    write(root, "api.c", &text);
}

#[test]
fn snapshots_track_edits() {
    let code = tempfile::tempdir().unwrap();
    let store_dir = tempfile::tempdir().unwrap();
    let store = SnapshotStore::open(store_dir.path());
    let config = Config::default();
    let registry = config.registry().unwrap();
    let rule_sets = config.rule_sets(&registry).unwrap();
    for (step, wide) in [3, 2, 1].into_iter().enumerate() {
        params_project(code.path(), wide);
        let a = analyze(code.path(), "api", &config).unwrap();
        let s = assess_project(&a, &rule_sets, &config).unwrap();
        store
            .save_at(
                NewSnapshot {
                    project_id: "api".into(),
                    label: format!("step {step}"),
                    tool_version: xmaint_core::TOOL_VERSION.into(),
                    config_hash: config.config_hash().unwrap(),
                    metrics_summary: metrics_summary(&a, &s, &config),
                    composite_total: None,
                },
                Utc.with_ymd_and_hms(2026, 1, 1 + step as u32, 0, 0, 0)
                    .unwrap(),
            )
            .unwrap();
    }
    // 20 min per too-many-params violation over 10 LOC at 30 min/LOC.
    let t = store.trend("api", "tdr", false).unwrap();
    let values: Vec<f64> = t.points.iter().map(|p| p.value.as_f64().unwrap()).collect();
    assert_eq!(values, [0.2, 0.1333, 0.0667]);
    assert!(t.points.iter().all(|p| !p.incomparable));
    let listed = store.list(Some("api")).unwrap();
    assert_eq!(listed.len(), 3);
    assert_eq!(listed[0].metrics_summary["grade"], "C");
}

fn docs(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs")
        .join(rel)
}

#[test]
fn documented_examples_load() {
    let config = Config::load(&docs("example-config.json")).unwrap();
    config.validate().unwrap();
    let rules = config.rule_sets(&config.registry().unwrap()).unwrap();
    assert!(rules.contains_key("cobol-like"));

    let profile = fs::read_to_string(docs("example-go-profile.json")).unwrap();
    let config: Config = serde_json::from_str(&format!(r#"{{"profiles": [{profile}]}}"#)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "main.go",
        "package main\n\n// Abs returns |x|.\nfunc Abs(x int) int {\n\tif x < 0 && x != -1 {\n\t\treturn -x\n\t}\n\treturn x\n}\n",
    );
    let a = analyze(dir.path(), "go", &config).unwrap();
    let u = &a.files[0].units[0];
    assert_eq!(
        (a.files[0].profile_id.as_str(), u.unit.name.as_str()),
        ("go", "Abs")
    );
    assert_eq!((u.cc, u.param_count, u.nesting_depth_max), (3, 1, 1));
}
