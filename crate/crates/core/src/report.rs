//! Report assembly and rendering.
//!
//! JSON is the canonical form. Every report is built as a `serde_json::Value`
//! (object keys sorted) with numbers rounded to fixed precision; Markdown and
//! CSV are rendered from that same value.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::analysis::{duplication_ratio, Assessment, Comparison, ProjectAnalysis};
use crate::config::{Config, ReportFormat};
use crate::error::{Diagnostic, Error, Result};
use crate::metrics::HalsteadCounts;
use crate::models::sig::RiskProfile;
use crate::snapshot::{Snapshot, TrendSeries};

/// Key holding the wall-clock time; the only field that varies between runs.
pub const GENERATED_AT: &str = "generatedAt";

fn round_to(x: f64, places: i32) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let factor = 10f64.powi(places);
    let r = (x * factor).round() / factor;
    // Avoid emitting -0.0.
    json!(if r == 0.0 { 0.0 } else { r })
}

/// Ratios: 4 decimals.
pub fn ratio(x: f64) -> Value {
    round_to(x, 4)
}

/// Scores, MI, volumes, averages: 2 decimals.
pub fn score(x: f64) -> Value {
    round_to(x, 2)
}

/// Effort in whole minutes.
pub fn minutes(x: f64) -> Value {
    if x.is_finite() {
        json!(x.round() as i64)
    } else {
        Value::Null
    }
}

fn opt(x: Option<f64>, f: fn(f64) -> Value) -> Value {
    x.map(f).unwrap_or(Value::Null)
}

fn halstead_json(h: &HalsteadCounts) -> Value {
    json!({
        "n1": h.n1,
        "n2": h.n2,
        "N1": h.total_operators,
        "N2": h.total_operands,
        "vocabulary": h.vocabulary,
        "length": h.length,
        "volume": score(h.volume),
    })
}

fn risk_json(p: &RiskProfile) -> Value {
    json!({
        "low": ratio(p.low),
        "moderate": ratio(p.moderate),
        "high": ratio(p.high),
        "veryHigh": ratio(p.very_high),
    })
}

fn diagnostics_json(diagnostics: &[Diagnostic], project: Option<&str>) -> Vec<Value> {
    diagnostics
        .iter()
        .map(|d| {
            let mut v = json!({
                "file": d.file,
                "line": d.line,
                "kind": d.kind,
                "message": d.message,
            });
            if let Some(p) = project {
                v["project"] = json!(p);
            }
            v
        })
        .collect()
}

fn project_json(analysis: &ProjectAnalysis, assessment: &Assessment, config: &Config) -> Value {
    let m = &analysis.metrics;
    let d = &analysis.duplication;
    let details = config.report.details;
    let files: Vec<Value> = analysis
        .files
        .iter()
        .map(|f| {
            let units: Vec<Value> = f
                .units
                .iter()
                .map(|u| {
                    json!({
                        "name": u.unit.name,
                        "startLine": u.unit.start_line,
                        "endLine": u.unit.end_line,
                        "loc": u.loc,
                        "cc": u.cc,
                        "paramCount": u.param_count,
                        "nestingDepthMax": u.nesting_depth_max,
                        "halsteadVolume": score(u.halstead.volume),
                    })
                })
                .collect();
            json!({
                "path": f.path,
                "profileId": f.profile_id,
                "lines": f.lines,
                "codeTokens": f.code_tokens,
                "cc": f.cc,
                "halstead": halstead_json(&f.halstead),
                "units": units,
            })
        })
        .collect();
    let mut duplication = json!({
        "duplicatedTokenRatio": ratio(d.duplicated_token_ratio),
        "duplicatedLineRatio": ratio(d.duplicated_line_ratio),
        "duplicatedTokens": d.duplicated_tokens,
        "totalTokens": d.total_tokens,
        "duplicatedLines": d.duplicated_lines,
        "totalLines": d.total_lines,
        "blockCount": d.blocks.len(),
        "minTokens": d.min_tokens,
        "normalizationMode": d.normalization_mode,
    });
    if details {
        duplication["blocks"] = json!(d.blocks);
    }
    let mut violations = json!({
        "total": assessment.violations.len(),
        "countsByRule": assessment.violation_counts,
        "rulesChecked": assessment.rule_ids,
    });
    if details {
        violations["items"] = json!(assessment
            .violations
            .iter()
            .map(|v| {
                json!({
                    "ruleId": v.rule_id,
                    "file": v.file,
                    "line": v.line,
                    "unitName": v.unit_name,
                    "observedValue": v.observed_value,
                    "threshold": v.threshold,
                    "effortMinutes": minutes(v.effort_minutes),
                })
            })
            .collect::<Vec<_>>());
    }
    let mi = assessment.mi.as_ref().map_or(Value::Null, |mi| {
        json!({
            "aHv": score(mi.a_hv),
            "aCc": score(mi.a_cc),
            "aLoc": score(mi.a_loc),
            "mi": score(mi.mi),
        })
    });
    let t = &assessment.tdr;
    let s = &assessment.sig;
    let characteristic: BTreeMap<_, _> = s
        .characteristic_ratings
        .iter()
        .map(|(c, r)| (*c, score(*r)))
        .collect();
    let mut sig = json!({
        "propertyRatings": s.property_ratings,
        "characteristicRatings": characteristic,
        "overall": opt(s.overall, score),
        "coverage": opt(config.models.coverage, ratio),
    });
    if let Some(p) = &s.complexity_profile {
        sig["complexityProfile"] = risk_json(p);
    }
    if let Some(p) = &s.unit_size_profile {
        sig["unitSizeProfile"] = risk_json(p);
    }
    json!({
        "projectId": analysis.project_id,
        "profiles": analysis.profiles_used(),
        "metrics": {
            "fileCount": m.file_count,
            "physicalLines": m.physical_lines,
            "lines": m.lines,
            "totalLoc": m.total_loc,
            "commentRatio": ratio(m.comment_ratio),
            "unitCount": m.unit_count,
            "aHv": opt(m.a_hv, score),
            "aCc": opt(m.a_cc, score),
            "aLoc": opt(m.a_loc, score),
            "maxCc": m.max_cc,
        },
        "files": files,
        "duplication": duplication,
        "violations": violations,
        "mi": mi,
        "tdr": {
            "remediationMinutes": minutes(t.remediation_minutes),
            "productionMinutes": minutes(t.production_minutes),
            "tdr": ratio(t.tdr),
            "grade": t.grade.to_string(),
            "costPerLineMinutes": assessment.cost_per_line_minutes,
        },
        "sig": sig,
    })
}

/// Canonical JSON of the effective configuration plus the run's own settings.
pub fn effective_config(config: &Config, run: Value) -> Result<Value> {
    let mut v = serde_json::to_value(config).map_err(|e| Error::json("config", e))?;
    v["run"] = run;
    Ok(v)
}

fn envelope(effective: Value, config_hash: &str, generated_at: &str) -> Map<String, Value> {
    let mut top = Map::new();
    top.insert("toolVersion".into(), json!(crate::TOOL_VERSION));
    top.insert("effectiveConfig".into(), effective);
    top.insert("configHash".into(), json!(config_hash));
    top.insert(GENERATED_AT.into(), json!(generated_at));
    top
}

/// Report for a single analysed project.
pub fn analyze_report(
    analysis: &ProjectAnalysis,
    assessment: &Assessment,
    config: &Config,
    effective: Value,
    generated_at: &str,
) -> Result<Value> {
    let mut top = envelope(effective, &config.config_hash()?, generated_at);
    top.insert("kind".into(), json!("analyze"));
    top.insert("project".into(), project_json(analysis, assessment, config));
    top.insert(
        "diagnostics".into(),
        json!(diagnostics_json(&analysis.diagnostics, None)),
    );
    Ok(Value::Object(top))
}

/// Report for a comparison: intersected rules, per-project results side by
/// side, and the composite ranking.
pub fn compare_report(
    analyses: &[ProjectAnalysis],
    comparison: &Comparison,
    config: &Config,
    effective: Value,
    generated_at: &str,
) -> Result<Value> {
    let mut top = envelope(effective, &config.config_hash()?, generated_at);
    top.insert("kind".into(), json!("compare"));
    let mut projects: Vec<(&str, Value)> = analyses
        .iter()
        .zip(&comparison.assessments)
        .map(|(a, s)| (a.project_id.as_str(), project_json(a, s, config)))
        .collect();
    projects.sort_by(|x, y| x.0.cmp(y.0));
    top.insert(
        "projects".into(),
        Value::Array(projects.into_iter().map(|(_, v)| v).collect()),
    );
    let per_profile: BTreeMap<&str, Vec<Value>> = comparison
        .intersection
        .rule_sets
        .iter()
        .map(|rs| {
            let rules = rs
                .rules
                .iter()
                .map(|r| {
                    json!({
                        "id": r.canonical_id,
                        "threshold": r.threshold,
                        "pattern": r.pattern,
                        "effortMinutes": minutes(r.effort_to_fix_minutes),
                    })
                })
                .collect();
            (rs.profile_id.as_str(), rules)
        })
        .collect();
    top.insert(
        "ruleIntersection".into(),
        json!({
            "shared": comparison.intersection.shared,
            "warning": comparison.intersection.warning,
            "perProfile": per_profile,
        }),
    );
    let ranking: Vec<Value> = comparison
        .composite
        .scores
        .iter()
        .map(|s| {
            let indicators: BTreeMap<_, _> = s
                .per_indicator
                .iter()
                .map(|(i, v)| (*i, json!({"raw": ratio(v.raw), "mapped": score(v.mapped)})))
                .collect();
            let weights: BTreeMap<_, _> = s
                .weights_used
                .iter()
                .map(|(i, w)| (*i, ratio(*w)))
                .collect();
            json!({
                "rank": s.rank,
                "projectId": s.project_id,
                "total": score(s.total),
                "indicators": indicators,
                "weightsUsed": weights,
            })
        })
        .collect();
    let weights: BTreeMap<_, _> = config
        .composite
        .weights()
        .into_iter()
        .map(|(i, w)| (i, ratio(w)))
        .collect();
    top.insert(
        "composite".into(),
        json!({
            "ranking": ranking,
            "weights": weights,
            "redistributed": comparison.composite.redistributed,
            "duplicationBasis": config.composite.duplication_basis,
        }),
    );
    if let Some(sens) = &comparison.sensitivity {
        let perturbations: Vec<Value> = sens
            .perturbations
            .iter()
            .map(|p| {
                let weights: BTreeMap<_, _> =
                    p.weights.iter().map(|(i, w)| (*i, ratio(*w))).collect();
                let totals: BTreeMap<_, _> = p
                    .totals
                    .iter()
                    .map(|(id, t)| (id.clone(), score(*t)))
                    .collect();
                json!({
                    "indicator": p.indicator,
                    "direction": p.direction,
                    "weights": weights,
                    "totals": totals,
                    "ranking": p.ranking,
                    "top1Changed": p.top1_changed,
                    "rankingChanged": p.ranking_changed,
                })
            })
            .collect();
        let ranges: BTreeMap<_, _> = sens
            .total_range
            .iter()
            .map(|(id, r)| {
                (
                    id.clone(),
                    json!({"min": score(r.min), "max": score(r.max)}),
                )
            })
            .collect();
        top.insert(
            "sensitivity".into(),
            json!({
                "deltaPp": sens.delta_pp,
                "baselineRanking": sens.baseline_ranking,
                "perturbations": perturbations,
                "top1Stable": sens.top1_stable,
                "fullRankingStable": sens.full_ranking_stable,
                "totalRange": ranges,
            }),
        );
    }
    let mut diagnostics: Vec<Value> = analyses
        .iter()
        .flat_map(|a| diagnostics_json(&a.diagnostics, Some(&a.project_id)))
        .collect();
    diagnostics.sort_by(|a, b| {
        (a["project"].as_str(), a["file"].as_str())
            .cmp(&(b["project"].as_str(), b["file"].as_str()))
    });
    top.insert("diagnostics".into(), Value::Array(diagnostics));
    Ok(Value::Object(top))
}

/// Flat metric map stored in snapshots; the keys accepted by `trend`.
pub fn metrics_summary(
    analysis: &ProjectAnalysis,
    assessment: &Assessment,
    config: &Config,
) -> BTreeMap<String, Value> {
    let m = &analysis.metrics;
    let d = &analysis.duplication;
    let entries = [
        ("fileCount", json!(m.file_count)),
        ("physicalLines", json!(m.physical_lines)),
        ("totalLoc", json!(m.total_loc)),
        ("codeLines", json!(m.lines.code)),
        ("commentLines", json!(m.lines.comment)),
        ("blankLines", json!(m.lines.blank)),
        ("mixedLines", json!(m.lines.mixed)),
        ("commentRatio", ratio(m.comment_ratio)),
        ("unitCount", json!(m.unit_count)),
        ("aHv", opt(m.a_hv, score)),
        ("aCc", opt(m.a_cc, score)),
        ("aLoc", opt(m.a_loc, score)),
        ("maxCc", json!(m.max_cc)),
        ("mi", opt(assessment.mi.as_ref().map(|x| x.mi), score)),
        ("tdr", ratio(assessment.tdr.tdr)),
        ("grade", json!(assessment.tdr.grade.to_string())),
        (
            "remediationMinutes",
            minutes(assessment.tdr.remediation_minutes),
        ),
        (
            "productionMinutes",
            minutes(assessment.tdr.production_minutes),
        ),
        ("violationCount", json!(assessment.violations.len())),
        ("sigOverall", opt(assessment.sig.overall, score)),
        ("duplicatedTokenRatio", ratio(d.duplicated_token_ratio)),
        ("duplicatedLineRatio", ratio(d.duplicated_line_ratio)),
        ("duplicationRatio", ratio(duplication_ratio(d, config))),
    ];
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Current UTC time as RFC 3339 with second precision.
pub fn timestamp_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Pretty JSON with a trailing newline.
pub fn to_json(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("Value always serializes");
    s.push('\n');
    s
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => "n/a".into(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn md_table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    out.push_str(&format!("| {} |\n", header.join(" | ")));
    out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    for row in rows {
        let escaped: Vec<String> = row.iter().map(|c| c.replace('|', "\\|")).collect();
        out.push_str(&format!("| {} |\n", escaped.join(" | ")));
    }
    out.push('\n');
}

fn md_project(out: &mut String, p: &Value) {
    out.push_str(&format!("## {}\n\n", cell(&p["projectId"])));
    let m = &p["metrics"];
    let rows: Vec<Vec<String>> = [
        ("Profiles", &p["profiles"]),
        ("Files", &m["fileCount"]),
        ("LOC", &m["totalLoc"]),
        ("Comment ratio", &m["commentRatio"]),
        ("Units", &m["unitCount"]),
        ("Max CC", &m["maxCc"]),
        (
            "Duplicated tokens",
            &p["duplication"]["duplicatedTokenRatio"],
        ),
        ("Duplicated lines", &p["duplication"]["duplicatedLineRatio"]),
        ("Clone blocks", &p["duplication"]["blockCount"]),
        ("Violations", &p["violations"]["total"]),
        ("Remediation (min)", &p["tdr"]["remediationMinutes"]),
        ("TDR", &p["tdr"]["tdr"]),
        ("TDR grade", &p["tdr"]["grade"]),
        ("MI", &p["mi"]["mi"]),
        ("SIG overall", &p["sig"]["overall"]),
    ]
    .iter()
    .map(|(k, v)| vec![k.to_string(), cell(v)])
    .collect();
    md_table(out, &["Metric", "Value"], &rows);
    if let Some(counts) = p["violations"]["countsByRule"].as_object() {
        if !counts.is_empty() {
            out.push_str("### Violations by rule\n\n");
            let rows: Vec<Vec<String>> = counts
                .iter()
                .map(|(k, v)| vec![k.clone(), cell(v)])
                .collect();
            md_table(out, &["Rule", "Count"], &rows);
        }
    }
}

fn md_diagnostics(out: &mut String, report: &Value) {
    let Some(diags) = report["diagnostics"].as_array() else {
        return;
    };
    if diags.is_empty() {
        return;
    }
    out.push_str("## Diagnostics\n\n");
    let rows: Vec<Vec<String>> = diags
        .iter()
        .map(|d| {
            let file = match d["project"].as_str() {
                Some(p) => format!("{p}:{}", cell(&d["file"])),
                None => cell(&d["file"]),
            };
            vec![
                file,
                cell(&d["line"]),
                cell(&d["kind"]),
                cell(&d["message"]),
            ]
        })
        .collect();
    md_table(out, &["File", "Line", "Kind", "Message"], &rows);
}

/// Markdown rendering of an `analyze` or `compare` report.
pub fn to_markdown(report: &Value) -> String {
    let mut out = String::new();
    match report["kind"].as_str() {
        Some("compare") => {
            out.push_str("# Comparison\n\n");
            out.push_str(&format!(
                "Tool {} · config `{}` · generated {}\n\n",
                cell(&report["toolVersion"]),
                cell(&report["configHash"]),
                cell(&report[GENERATED_AT])
            ));
            out.push_str("## Ranking\n\n");
            let ranking = report["composite"]["ranking"]
                .as_array()
                .cloned()
                .unwrap_or_default();
            let rows: Vec<Vec<String>> = ranking
                .iter()
                .map(|r| {
                    let ind = &r["indicators"];
                    vec![
                        cell(&r["rank"]),
                        cell(&r["projectId"]),
                        cell(&r["total"]),
                        cell(&ind["commentRatio"]["mapped"]),
                        cell(&ind["duplicationRatio"]["mapped"]),
                        cell(&ind["tdr"]["mapped"]),
                        cell(&ind["volumetry"]["mapped"]),
                    ]
                })
                .collect();
            md_table(
                &mut out,
                &[
                    "Rank",
                    "Project",
                    "Total",
                    "Comments",
                    "Duplication",
                    "TDR",
                    "Volumetry",
                ],
                &rows,
            );
            out.push_str("## Other models\n\n");
            let projects = report["projects"].as_array().cloned().unwrap_or_default();
            let rows: Vec<Vec<String>> = projects
                .iter()
                .map(|p| {
                    vec![
                        cell(&p["projectId"]),
                        cell(&p["mi"]["mi"]),
                        cell(&p["tdr"]["grade"]),
                        cell(&p["sig"]["overall"]),
                        cell(&p["duplication"]["duplicatedTokenRatio"]),
                        cell(&p["duplication"]["duplicatedLineRatio"]),
                    ]
                })
                .collect();
            md_table(
                &mut out,
                &[
                    "Project",
                    "MI",
                    "TDR grade",
                    "SIG overall",
                    "Dup. tokens",
                    "Dup. lines",
                ],
                &rows,
            );
            out.push_str(&format!(
                "Shared rules: {}\n\n",
                cell(&report["ruleIntersection"]["shared"])
            ));
            if let Some(w) = report["ruleIntersection"]["warning"].as_str() {
                out.push_str(&format!("Warning: {w}\n\n"));
            }
            let sens = &report["sensitivity"];
            if sens.is_object() {
                out.push_str(&format!(
                    "## Sensitivity (±{} pp)\n\n",
                    cell(&sens["deltaPp"])
                ));
                let rows: Vec<Vec<String>> = sens["perturbations"]
                    .as_array()
                    .cloned()
                    .unwrap_or_default()
                    .iter()
                    .map(|p| {
                        vec![
                            cell(&p["indicator"]),
                            cell(&p["direction"]),
                            cell(&p["ranking"]),
                            cell(&p["top1Changed"]),
                        ]
                    })
                    .collect();
                md_table(
                    &mut out,
                    &["Indicator", "Direction", "Ranking", "Top-1 changed"],
                    &rows,
                );
                out.push_str(&format!(
                    "Top-1 stable: {} · full ranking stable: {}\n\n",
                    cell(&sens["top1Stable"]),
                    cell(&sens["fullRankingStable"])
                ));
            }
            for p in &projects {
                md_project(&mut out, p);
            }
        }
        _ => {
            out.push_str(&format!(
                "# Maintainability report: {}\n\n",
                cell(&report["project"]["projectId"])
            ));
            out.push_str(&format!(
                "Tool {} · config `{}` · generated {}\n\n",
                cell(&report["toolVersion"]),
                cell(&report["configHash"]),
                cell(&report[GENERATED_AT])
            ));
            md_project(&mut out, &report["project"]);
        }
    }
    md_diagnostics(&mut out, report);
    out
}

const CSV_COLUMNS: [&str; 17] = [
    "projectId",
    "fileCount",
    "totalLoc",
    "commentRatio",
    "unitCount",
    "maxCc",
    "duplicatedTokenRatio",
    "duplicatedLineRatio",
    "violations",
    "remediationMinutes",
    "tdr",
    "grade",
    "mi",
    "sigOverall",
    "compositeTotal",
    "rank",
    "diagnostics",
];

fn csv_writer(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV of UTF-8 fields")
}

/// One row per project.
pub fn to_csv(report: &Value) -> String {
    let projects: Vec<Value> = match report["kind"].as_str() {
        Some("compare") => report["projects"].as_array().cloned().unwrap_or_default(),
        _ => vec![report["project"].clone()],
    };
    let ranking: BTreeMap<String, &Value> = report["composite"]["ranking"]
        .as_array()
        .map(|r| r.iter().map(|s| (cell(&s["projectId"]), s)).collect())
        .unwrap_or_default();
    let diags = report["diagnostics"]
        .as_array()
        .cloned()
        .unwrap_or_default();
    let mut rows = vec![CSV_COLUMNS.iter().map(|s| s.to_string()).collect()];
    for p in &projects {
        let id = cell(&p["projectId"]);
        let rank = ranking.get(&id);
        let empty = |v: &Value| if v.is_null() { String::new() } else { cell(v) };
        let diag_count = diags
            .iter()
            .filter(|d| d["project"].as_str().is_none_or(|x| x == id))
            .count();
        rows.push(vec![
            id.clone(),
            cell(&p["metrics"]["fileCount"]),
            cell(&p["metrics"]["totalLoc"]),
            cell(&p["metrics"]["commentRatio"]),
            cell(&p["metrics"]["unitCount"]),
            empty(&p["metrics"]["maxCc"]),
            cell(&p["duplication"]["duplicatedTokenRatio"]),
            cell(&p["duplication"]["duplicatedLineRatio"]),
            cell(&p["violations"]["total"]),
            cell(&p["tdr"]["remediationMinutes"]),
            cell(&p["tdr"]["tdr"]),
            cell(&p["tdr"]["grade"]),
            empty(&p["mi"]["mi"]),
            empty(&p["sig"]["overall"]),
            rank.map(|r| empty(&r["total"])).unwrap_or_default(),
            rank.map(|r| empty(&r["rank"])).unwrap_or_default(),
            diag_count.to_string(),
        ]);
    }
    csv_writer(rows)
}

pub fn render(report: &Value, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Md => to_markdown(report),
        ReportFormat::Csv => to_csv(report),
    }
}

pub fn trend_json(series: &TrendSeries) -> Value {
    serde_json::to_value(series).expect("plain data")
}

pub fn render_trend(series: &TrendSeries, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => to_json(&trend_json(series)),
        ReportFormat::Md => {
            let mut out = format!(
                "# Trend of `{}` for {}\n\n",
                series.metric, series.project_id
            );
            let rows: Vec<Vec<String>> = series
                .points
                .iter()
                .map(|p| {
                    vec![
                        p.timestamp_utc.clone(),
                        p.label.clone(),
                        cell(&p.value),
                        if p.incomparable {
                            "incomparable".into()
                        } else {
                            String::new()
                        },
                    ]
                })
                .collect();
            md_table(&mut out, &["Timestamp", "Label", "Value", "Note"], &rows);
            out
        }
        ReportFormat::Csv => {
            let mut rows = vec![vec![
                "timestampUtc".to_string(),
                "snapshotId".into(),
                "label".into(),
                "value".into(),
                "configHash".into(),
                "incomparable".into(),
            ]];
            rows.extend(series.points.iter().map(|p| {
                vec![
                    p.timestamp_utc.clone(),
                    p.snapshot_id.clone(),
                    p.label.clone(),
                    cell(&p.value),
                    p.config_hash.clone(),
                    p.incomparable.to_string(),
                ]
            }));
            csv_writer(rows)
        }
    }
}

pub fn render_snapshot_list(snapshots: &[Snapshot], format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let items: Vec<Value> = snapshots
                .iter()
                .map(|s| {
                    json!({
                        "projectId": s.project_id,
                        "snapshotId": s.snapshot_id,
                        "timestampUtc": s.timestamp_utc,
                        "label": s.label,
                        "configHash": s.config_hash,
                    })
                })
                .collect();
            to_json(&Value::Array(items))
        }
        ReportFormat::Md => {
            let mut out = String::from("# Snapshots\n\n");
            let rows: Vec<Vec<String>> = snapshots
                .iter()
                .map(|s| {
                    vec![
                        s.project_id.clone(),
                        s.snapshot_id.clone(),
                        s.timestamp_utc.clone(),
                        s.label.clone(),
                    ]
                })
                .collect();
            md_table(
                &mut out,
                &["Project", "Snapshot", "Timestamp", "Label"],
                &rows,
            );
            out
        }
        ReportFormat::Csv => {
            let mut rows = vec![vec![
                "projectId".to_string(),
                "snapshotId".into(),
                "timestampUtc".into(),
                "label".into(),
                "configHash".into(),
            ]];
            rows.extend(snapshots.iter().map(|s| {
                vec![
                    s.project_id.clone(),
                    s.snapshot_id.clone(),
                    s.timestamp_utc.clone(),
                    s.label.clone(),
                    s.config_hash.clone(),
                ]
            }));
            csv_writer(rows)
        }
    }
}

/// Drops the wall-clock field so two reports can be compared byte for byte.
pub fn without_generated_at(mut report: Value) -> Value {
    if let Some(obj) = report.as_object_mut() {
        obj.remove(GENERATED_AT);
    }
    report
}
