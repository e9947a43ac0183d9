//! Weighted composite scoring for cross-language comparison.
//!
//! Each indicator is mapped onto 0..100 by an explicit piecewise-linear shape,
//! then combined with plain weights. Absent indicators give their weight back
//! proportionally, so totals stay on the same scale.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{CanonicalRule, RuleSet};

const WEIGHT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Indicator {
    CommentRatio,
    DuplicationRatio,
    Tdr,
    Volumetry,
}

impl Indicator {
    pub const ALL: [Indicator; 4] = [
        Indicator::CommentRatio,
        Indicator::DuplicationRatio,
        Indicator::Tdr,
        Indicator::Volumetry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::CommentRatio => "commentRatio",
            Indicator::DuplicationRatio => "duplicationRatio",
            Indicator::Tdr => "tdr",
            Indicator::Volumetry => "volumetry",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// 0 at `low`, 100 at `high`, clamped outside.
    RisingLinear,
    /// 100 at `low`, 0 at `high`, clamped outside.
    FallingLinear,
    /// Rising up to `high`, then back down with the same slope until 0.
    RisingThenFalling,
    /// Falling-linear over the ratio `value / min(value over projects)`.
    RelativeMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorMapping {
    pub shape: Shape,
    pub low: f64,
    pub high: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DuplicationBasis {
    #[default]
    Token,
    Line,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    /// Weight perturbation in percentage points.
    pub delta_pp: f64,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self { delta_pp: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompositeConfig {
    pub indicators: BTreeMap<Indicator, IndicatorMapping>,
    /// Which duplication ratio feeds the duplication indicator.
    pub duplication_basis: DuplicationBasis,
    pub sensitivity: SensitivityConfig,
}

impl Default for CompositeConfig {
    fn default() -> Self {
        Self {
            indicators: BTreeMap::from([
                (
                    Indicator::CommentRatio,
                    IndicatorMapping {
                        shape: Shape::RisingThenFalling,
                        low: 0.15,
                        high: 0.40,
                        weight: 0.15,
                    },
                ),
                (
                    Indicator::DuplicationRatio,
                    IndicatorMapping {
                        shape: Shape::FallingLinear,
                        low: 0.05,
                        high: 0.15,
                        weight: 0.15,
                    },
                ),
                (
                    Indicator::Tdr,
                    IndicatorMapping {
                        shape: Shape::FallingLinear,
                        low: 0.0,
                        high: 0.20,
                        weight: 0.45,
                    },
                ),
                (
                    Indicator::Volumetry,
                    IndicatorMapping {
                        shape: Shape::RelativeMin,
                        low: 1.0,
                        high: 1.5,
                        weight: 0.25,
                    },
                ),
            ]),
            duplication_basis: DuplicationBasis::Token,
            sensitivity: SensitivityConfig::default(),
        }
    }
}

impl CompositeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(format!("composite: {msg}")));
        let mut sum = 0.0;
        for (indicator, m) in &self.indicators {
            if !(0.0..=1.0).contains(&m.weight) {
                return bad(format!("weight of {indicator} must lie in [0, 1]"));
            }
            if !(m.low.is_finite() && m.high.is_finite()) || m.low == m.high {
                return bad(format!("{indicator} needs two distinct finite bounds"));
            }
            if (*indicator == Indicator::Volumetry) != (m.shape == Shape::RelativeMin) {
                return bad(format!(
                    "{indicator}: relative-min is the volumetry shape and only that"
                ));
            }
            if m.shape == Shape::RelativeMin && !(m.low > 0.0 && m.high > m.low) {
                return bad("volumetry bounds must satisfy 0 < low < high".into());
            }
            sum += m.weight;
        }
        if (sum - 1.0).abs() > WEIGHT_EPS {
            return bad(format!("weights sum to {sum}, expected 1"));
        }
        if self.sensitivity.delta_pp.is_nan() || self.sensitivity.delta_pp <= 0.0 {
            return bad("sensitivity.delta_pp must be positive".into());
        }
        Ok(())
    }

    pub fn weights(&self) -> BTreeMap<Indicator, f64> {
        self.indicators
            .iter()
            .map(|(i, m)| (*i, m.weight))
            .collect()
    }
}

fn clamp_score(x: f64) -> f64 {
    x.clamp(0.0, 100.0)
}

/// Maps a raw indicator value onto 0..100. For `relative-min`, `value` is the
/// project's ratio to the smallest compared project.
pub fn map_indicator(value: f64, mapping: &IndicatorMapping) -> f64 {
    let (low, high) = (mapping.low, mapping.high);
    let rising = (value - low) / (high - low) * 100.0;
    match mapping.shape {
        Shape::RisingLinear => clamp_score(rising),
        Shape::FallingLinear | Shape::RelativeMin => clamp_score(100.0 - rising),
        Shape::RisingThenFalling => {
            if value <= high {
                clamp_score(rising)
            } else {
                clamp_score(100.0 - (value - high) / (high - low) * 100.0)
            }
        }
    }
}

/// TDR score under the default 0..20% falling mapping.
pub fn map_tdr_indicator(tdr: f64) -> f64 {
    map_indicator(tdr, &CompositeConfig::default().indicators[&Indicator::Tdr])
}

/// Volumetry scores relative to the smallest project of the compared set.
pub fn map_volumetry(
    loc_by_project: &BTreeMap<String, usize>,
    mapping: &IndicatorMapping,
) -> Result<BTreeMap<String, f64>> {
    if loc_by_project.len() < 2 {
        return Err(Error::SingleProject);
    }
    if let Some((id, _)) = loc_by_project.iter().find(|(_, &loc)| loc == 0) {
        return Err(Error::InvalidConfig(format!(
            "volumetry needs code lines; project `{id}` has none"
        )));
    }
    let min = *loc_by_project.values().min().expect("non-empty") as f64;
    Ok(loc_by_project
        .iter()
        .map(|(id, &loc)| {
            let score = if loc as f64 == min {
                100.0
            } else {
                map_indicator(loc as f64 / min, mapping)
            };
            (id.clone(), score)
        })
        .collect())
}

/// Inputs of the composite for one project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectIndicators {
    pub project_id: String,
    pub comment_ratio: Option<f64>,
    pub duplication_ratio: Option<f64>,
    pub tdr: Option<f64>,
    pub total_loc: usize,
    pub cost_per_line_minutes: f64,
    /// Canonical ids of the rules the TDR was computed with.
    pub rule_ids: BTreeSet<CanonicalRule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorScore {
    pub raw: f64,
    pub mapped: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeScore {
    pub project_id: String,
    pub per_indicator: BTreeMap<Indicator, IndicatorScore>,
    /// Weights actually applied after redistributing absent indicators.
    pub weights_used: BTreeMap<Indicator, f64>,
    pub total: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeOutcome {
    /// Ranked, best first.
    pub scores: Vec<CompositeScore>,
    /// Configured indicators missing for at least one project.
    pub redistributed: Vec<Indicator>,
}

/// Weights of the indicators present in `mapped`, rescaled to sum to 1.
pub fn renormalized_weights(
    mapped: &BTreeMap<Indicator, f64>,
    weights: &BTreeMap<Indicator, f64>,
) -> BTreeMap<Indicator, f64> {
    let present: f64 = weights
        .iter()
        .filter(|(i, _)| mapped.contains_key(i))
        .map(|(_, w)| w)
        .sum();
    weights
        .iter()
        .filter(|(i, _)| mapped.contains_key(i))
        .map(|(i, w)| (*i, if present > 0.0 { w / present } else { 0.0 }))
        .collect()
}

/// `Σ weight × mapped score` over present indicators, weights renormalized.
pub fn weighted_total(
    mapped: &BTreeMap<Indicator, f64>,
    weights: &BTreeMap<Indicator, f64>,
) -> f64 {
    renormalized_weights(mapped, weights)
        .iter()
        .map(|(i, w)| w * mapped[i])
        .sum()
}

/// Project ids by descending total, ties broken by id.
pub fn ranking(totals: &BTreeMap<String, f64>) -> Vec<String> {
    let mut ids: Vec<&String> = totals.keys().collect();
    ids.sort_by(|a, b| totals[*b].total_cmp(&totals[*a]).then_with(|| a.cmp(b)));
    ids.into_iter().cloned().collect()
}

fn same_estimator(projects: &[ProjectIndicators]) -> Result<()> {
    let Some(first) = projects.first() else {
        return Ok(());
    };
    if let Some(other) = projects
        .iter()
        .find(|p| p.cost_per_line_minutes != first.cost_per_line_minutes)
    {
        return Err(Error::EstimatorMismatch(format!(
            "`{}` uses {} min/LOC, `{}` uses {} min/LOC",
            first.project_id,
            first.cost_per_line_minutes,
            other.project_id,
            other.cost_per_line_minutes
        )));
    }
    Ok(())
}

/// Mapped scores of every configured indicator, per project.
pub fn mapped_scores(
    projects: &[ProjectIndicators],
    config: &CompositeConfig,
) -> Result<BTreeMap<String, BTreeMap<Indicator, IndicatorScore>>> {
    let mut out: BTreeMap<String, BTreeMap<Indicator, IndicatorScore>> = BTreeMap::new();
    let volumetry = match config.indicators.get(&Indicator::Volumetry) {
        Some(mapping) => {
            let locs: BTreeMap<String, usize> = projects
                .iter()
                .map(|p| (p.project_id.clone(), p.total_loc))
                .collect();
            match map_volumetry(&locs, mapping) {
                Ok(v) => Some(v),
                Err(Error::SingleProject) => None,
                Err(e) => return Err(e),
            }
        }
        None => None,
    };
    for p in projects {
        let entry = out.entry(p.project_id.clone()).or_default();
        for (indicator, mapping) in &config.indicators {
            let raw = match indicator {
                Indicator::CommentRatio => p.comment_ratio,
                Indicator::DuplicationRatio => p.duplication_ratio,
                Indicator::Tdr => p.tdr,
                Indicator::Volumetry => None,
            };
            let score = match (indicator, raw) {
                (Indicator::Volumetry, _) => volumetry.as_ref().map(|v| IndicatorScore {
                    raw: p.total_loc as f64,
                    mapped: v[&p.project_id],
                }),
                (_, Some(raw)) => Some(IndicatorScore {
                    raw,
                    mapped: map_indicator(raw, mapping),
                }),
                (_, None) => None,
            };
            if let Some(score) = score {
                entry.insert(*indicator, score);
            }
        }
    }
    Ok(out)
}

/// Scores and ranks the compared projects.
pub fn composite_scores(
    projects: &[ProjectIndicators],
    config: &CompositeConfig,
) -> Result<CompositeOutcome> {
    config.validate()?;
    same_estimator(projects)?;
    if let Some(first) = projects.first() {
        if let Some(other) = projects.iter().find(|p| p.rule_ids != first.rule_ids) {
            return Err(Error::RuleSetMismatch(format!(
                "`{}` and `{}` were checked against different rules; intersect the rule sets first",
                first.project_id, other.project_id
            )));
        }
    }
    let mut ids = BTreeSet::new();
    for p in projects {
        if !ids.insert(&p.project_id) {
            return Err(Error::InvalidConfig(format!(
                "duplicate project id `{}`",
                p.project_id
            )));
        }
    }
    let weights = config.weights();
    let mapped = mapped_scores(projects, config)?;
    let mut redistributed = BTreeSet::new();
    let mut scores: Vec<CompositeScore> = mapped
        .into_iter()
        .map(|(project_id, per_indicator)| {
            let values: BTreeMap<Indicator, f64> =
                per_indicator.iter().map(|(i, s)| (*i, s.mapped)).collect();
            for i in weights.keys().filter(|i| !values.contains_key(i)) {
                redistributed.insert(*i);
            }
            CompositeScore {
                total: weighted_total(&values, &weights),
                weights_used: renormalized_weights(&values, &weights),
                project_id,
                per_indicator,
                rank: 0,
            }
        })
        .collect();
    let totals: BTreeMap<String, f64> = scores
        .iter()
        .map(|s| (s.project_id.clone(), s.total))
        .collect();
    let order = ranking(&totals);
    for s in &mut scores {
        s.rank = order
            .iter()
            .position(|id| *id == s.project_id)
            .expect("ranked")
            + 1;
    }
    scores.sort_by_key(|s| s.rank);
    Ok(CompositeOutcome {
        scores,
        redistributed: redistributed.into_iter().collect(),
    })
}

/// Pairs that would count one attribute twice: once as a weighted indicator
/// and once more as debt through an enabled rule.
const SINGLE_COUNTING_CONFLICTS: [(Indicator, CanonicalRule); 1] =
    [(Indicator::DuplicationRatio, CanonicalRule::DuplicationBlock)];

/// Conflicting `(indicator, rule)` pairs; empty when every attribute is counted once.
pub fn single_counting_conflicts(
    config: &CompositeConfig,
    rule_sets: &[RuleSet],
) -> Vec<(Indicator, CanonicalRule)> {
    SINGLE_COUNTING_CONFLICTS
        .iter()
        .filter(|(indicator, rule)| {
            let weighted = config
                .indicators
                .get(indicator)
                .is_some_and(|m| m.weight > 0.0);
            let enabled = rule_sets
                .iter()
                .any(|rs| rs.get(*rule).is_some_and(|r| r.enabled));
            weighted && enabled
        })
        .copied()
        .collect()
}

pub fn validate_single_counting(config: &CompositeConfig, rule_sets: &[RuleSet]) -> Result<()> {
    let conflicts = single_counting_conflicts(config, rule_sets);
    if conflicts.is_empty() {
        Ok(())
    } else {
        Err(Error::SingleCountingViolation(
            conflicts
                .into_iter()
                .map(|(i, r)| (i.to_string(), r.to_string()))
                .collect(),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minus,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub indicator: Indicator,
    pub direction: Direction,
    pub weights: BTreeMap<Indicator, f64>,
    pub totals: BTreeMap<String, f64>,
    pub ranking: Vec<String>,
    pub top1_changed: bool,
    pub ranking_changed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub delta_pp: f64,
    pub baseline_ranking: Vec<String>,
    pub perturbations: Vec<Perturbation>,
    pub top1_stable: bool,
    pub full_ranking_stable: bool,
    /// Min/max total per project across baseline and all perturbations.
    pub total_range: BTreeMap<String, TotalRange>,
}

/// Shifts one weight by `delta` (floored at 0) and rescales all to sum 1.
pub fn perturb_weights(
    weights: &BTreeMap<Indicator, f64>,
    indicator: Indicator,
    delta: f64,
) -> BTreeMap<Indicator, f64> {
    let mut w = weights.clone();
    if let Some(v) = w.get_mut(&indicator) {
        *v = (*v + delta).max(0.0);
    }
    let sum: f64 = w.values().sum();
    if sum > 0.0 {
        for v in w.values_mut() {
            *v /= sum;
        }
    }
    w
}

/// Re-ranks the projects under every ±`delta_pp` single-weight perturbation.
pub fn sensitivity_analysis(
    mapped: &BTreeMap<String, BTreeMap<Indicator, f64>>,
    weights: &BTreeMap<Indicator, f64>,
    delta_pp: f64,
) -> SensitivityReport {
    let totals_for = |w: &BTreeMap<Indicator, f64>| -> BTreeMap<String, f64> {
        mapped
            .iter()
            .map(|(id, scores)| (id.clone(), weighted_total(scores, w)))
            .collect()
    };
    let baseline_totals = totals_for(weights);
    let baseline_ranking = ranking(&baseline_totals);
    let mut total_range: BTreeMap<String, TotalRange> = baseline_totals
        .iter()
        .map(|(id, &t)| (id.clone(), TotalRange { min: t, max: t }))
        .collect();
    let delta = delta_pp / 100.0;
    let mut perturbations = Vec::new();
    for &indicator in weights.keys() {
        for direction in [Direction::Minus, Direction::Plus] {
            let signed = match direction {
                Direction::Minus => -delta,
                Direction::Plus => delta,
            };
            let w = perturb_weights(weights, indicator, signed);
            let totals = totals_for(&w);
            let order = ranking(&totals);
            for (id, &t) in &totals {
                let r = total_range.get_mut(id).expect("same projects");
                r.min = r.min.min(t);
                r.max = r.max.max(t);
            }
            perturbations.push(Perturbation {
                indicator,
                direction,
                top1_changed: order.first() != baseline_ranking.first(),
                ranking_changed: order != baseline_ranking,
                weights: w,
                totals,
                ranking: order,
            });
        }
    }
    SensitivityReport {
        delta_pp,
        top1_stable: perturbations.iter().all(|p| !p.top1_changed),
        full_ranking_stable: perturbations.iter().all(|p| !p.ranking_changed),
        baseline_ranking,
        perturbations,
        total_range,
    }
}
