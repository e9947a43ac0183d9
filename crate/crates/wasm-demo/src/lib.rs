//! Browser bindings for xmaint. Every export takes and returns JSON text so
//! the page needs no generated TypeScript types.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;
use xmaint_core::analysis::{analyze_sources, assess_project, SourceText};
use xmaint_core::composite::{
    composite_scores, map_indicator, sensitivity_analysis, CompositeConfig, Indicator,
    IndicatorMapping, ProjectIndicators, Shape,
};
use xmaint_core::config::Config;
use xmaint_core::report::{analyze_report, without_generated_at};

#[wasm_bindgen(js_name = analyzeSnippet)]
pub fn analyze_snippet_js(source: &str, profile_id: &str) -> Result<String, JsValue> {
    analyze_snippet(source, profile_id).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = scoreProjects)]
pub fn score_projects_js(input: &str) -> Result<String, JsValue> {
    score_projects(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = mappingCurve)]
pub fn mapping_curve_js(
    shape: &str,
    low: f64,
    high: f64,
    samples: usize,
) -> Result<String, JsValue> {
    mapping_curve(shape, low, high, samples).map_err(|e| JsValue::from_str(&e))
}

/// Full analysis report of one in-memory file.
pub fn analyze_snippet(source: &str, profile_id: &str) -> Result<String, String> {
    let config = Config::default();
    let registry = config.registry().map_err(|e| e.to_string())?;
    let profile = registry.get(profile_id).map_err(|e| e.to_string())?;
    let ext = profile
        .spec()
        .file_extensions
        .first()
        .cloned()
        .unwrap_or_default();
    let sources = [SourceText {
        path: format!("snippet.{}", ext.trim_start_matches('.')),
        profile_id: profile_id.to_string(),
        content: source.to_string(),
    }];
    let analysis = analyze_sources("snippet", &sources, Vec::new(), &config, &registry)
        .map_err(|e| e.to_string())?;
    let rule_sets = config.rule_sets(&registry).map_err(|e| e.to_string())?;
    let assessment = assess_project(&analysis, &rule_sets, &config).map_err(|e| e.to_string())?;
    let report = analyze_report(&analysis, &assessment, &config, json!({}), "")
        .map_err(|e| e.to_string())?;
    Ok(without_generated_at(report).to_string())
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ScoreInput {
    projects: Vec<ProjectInput>,
    #[serde(default)]
    weights: BTreeMap<Indicator, f64>,
    #[serde(default = "default_delta")]
    delta_pp: f64,
}

fn default_delta() -> f64 {
    5.0
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ProjectInput {
    id: String,
    comment_ratio: Option<f64>,
    duplication_ratio: Option<f64>,
    tdr: Option<f64>,
    total_loc: usize,
}

/// Composite ranking plus the sensitivity sweep for hand-entered indicators.
///
/// Input: `{"projects": [{"id", "commentRatio", "duplicationRatio", "tdr",
/// "totalLoc"}], "weights": {"tdr": 0.5, ...}, "deltaPp": 5}`. Weights not
/// given keep their defaults.
pub fn score_projects(input: &str) -> Result<String, String> {
    let input: ScoreInput = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let mut cfg = CompositeConfig::default();
    for (indicator, w) in &input.weights {
        if let Some(m) = cfg.indicators.get_mut(indicator) {
            m.weight = *w;
        }
    }
    let projects: Vec<ProjectIndicators> = input
        .projects
        .into_iter()
        .map(|p| ProjectIndicators {
            project_id: p.id,
            comment_ratio: p.comment_ratio,
            duplication_ratio: p.duplication_ratio,
            tdr: p.tdr,
            total_loc: p.total_loc,
            cost_per_line_minutes: 30.0,
            rule_ids: Default::default(),
        })
        .collect();
    let outcome = composite_scores(&projects, &cfg).map_err(|e| e.to_string())?;
    let mapped: BTreeMap<String, BTreeMap<Indicator, f64>> = outcome
        .scores
        .iter()
        .map(|s| {
            (
                s.project_id.clone(),
                s.per_indicator
                    .iter()
                    .map(|(i, v)| (*i, v.mapped))
                    .collect(),
            )
        })
        .collect();
    let sensitivity =
        (projects.len() > 1).then(|| sensitivity_analysis(&mapped, &cfg.weights(), input.delta_pp));
    Ok(json!({
        "ranking": outcome.scores,
        "redistributed": outcome.redistributed,
        "sensitivity": sensitivity,
    })
    .to_string())
}

/// `[x, score]` pairs spanning the interesting part of a mapping.
pub fn mapping_curve(shape: &str, low: f64, high: f64, samples: usize) -> Result<String, String> {
    let shape: Shape = serde_json::from_value(Value::from(shape)).map_err(|e| e.to_string())?;
    if !low.is_finite() || !high.is_finite() || low >= high || samples < 2 {
        return Err("need low < high and at least 2 samples".into());
    }
    let mapping = IndicatorMapping {
        shape,
        low,
        high,
        weight: 1.0,
    };
    let span = high - low;
    let from = (low - span * 0.5).max(0.0);
    let to = high + span * 1.5;
    let points: Vec<[f64; 2]> = (0..samples)
        .map(|k| {
            let x = from + (to - from) * k as f64 / (samples - 1) as f64;
            [x, map_indicator(x, &mapping)]
        })
        .collect();
    serde_json::to_string(&points).map_err(|e| e.to_string())
}
