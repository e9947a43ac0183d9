//! Coding rules, their violations, and cross-language rule-set intersection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::duplication::CloneBlock;
use crate::error::{Error, Result};
use crate::metrics::UnitMetrics;
use crate::profile::LanguageProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CanonicalRule {
    ComplexityThreshold,
    UnitSizeThreshold,
    TooManyParams,
    NestingDepth,
    NamingConvention,
    DuplicationBlock,
}

impl CanonicalRule {
    pub const ALL: [CanonicalRule; 6] = [
        CanonicalRule::ComplexityThreshold,
        CanonicalRule::UnitSizeThreshold,
        CanonicalRule::TooManyParams,
        CanonicalRule::NestingDepth,
        CanonicalRule::NamingConvention,
        CanonicalRule::DuplicationBlock,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CanonicalRule::ComplexityThreshold => "complexity-threshold",
            CanonicalRule::UnitSizeThreshold => "unit-size-threshold",
            CanonicalRule::TooManyParams => "too-many-params",
            CanonicalRule::NestingDepth => "nesting-depth",
            CanonicalRule::NamingConvention => "naming-convention",
            CanonicalRule::DuplicationBlock => "duplication-block",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }

    fn takes_threshold(self) -> bool {
        !matches!(
            self,
            CanonicalRule::NamingConvention | CanonicalRule::DuplicationBlock
        )
    }

    fn default_threshold(self) -> Option<usize> {
        match self {
            CanonicalRule::ComplexityThreshold => Some(15),
            CanonicalRule::UnitSizeThreshold => Some(60),
            CanonicalRule::TooManyParams => Some(5),
            CanonicalRule::NestingDepth => Some(4),
            _ => None,
        }
    }

    fn default_effort(self) -> f64 {
        match self {
            CanonicalRule::ComplexityThreshold => 60.0,
            CanonicalRule::UnitSizeThreshold => 45.0,
            CanonicalRule::TooManyParams => 20.0,
            CanonicalRule::NestingDepth => 30.0,
            CanonicalRule::NamingConvention => 10.0,
            CanonicalRule::DuplicationBlock => 30.0,
        }
    }
}

impl fmt::Display for CanonicalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub canonical_id: CanonicalRule,
    pub profile_id: String,
    /// Effective threshold (unit size already scaled by the profile's verbosity).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<usize>,
    /// Unscaled unit-size threshold as configured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_threshold: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    pub effort_to_fix_minutes: f64,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub profile_id: String,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn get(&self, id: CanonicalRule) -> Option<&Rule> {
        self.rules.iter().find(|r| r.canonical_id == id)
    }

    pub fn enabled_ids(&self) -> BTreeSet<CanonicalRule> {
        self.rules
            .iter()
            .filter(|r| r.enabled)
            .map(|r| r.canonical_id)
            .collect()
    }
}

/// Per-rule overrides as written in the `rules` config section.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effort_minutes: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enabled: Option<bool>,
}

/// The `rules` config section: overrides for every profile, plus
/// `profiles.<id>` overrides applied on top for one profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RulesConfig {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub profiles: BTreeMap<String, BTreeMap<String, serde_json::Value>>,
    #[serde(flatten)]
    pub common: BTreeMap<String, serde_json::Value>,
}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidRuleConfig {
        key: key.into(),
        reason: reason.into(),
    }
}

fn apply_overrides(
    rules: &mut BTreeMap<CanonicalRule, Rule>,
    section: &BTreeMap<String, serde_json::Value>,
    prefix: &str,
) -> Result<()> {
    for (key, value) in section {
        let path = format!("{prefix}{key}");
        let id = CanonicalRule::parse(key).ok_or_else(|| invalid(&path, "unknown rule id"))?;
        let o: RuleOverride =
            serde_json::from_value(value.clone()).map_err(|e| invalid(&path, e.to_string()))?;
        let rule = rules.get_mut(&id).expect("all rules have defaults");
        if let Some(t) = &o.threshold {
            if !id.takes_threshold() {
                return Err(invalid(
                    format!("{path}.threshold"),
                    "rule takes no threshold",
                ));
            }
            let t = t.as_u64().ok_or_else(|| {
                invalid(
                    format!("{path}.threshold"),
                    "expected a non-negative integer",
                )
            })?;
            rule.base_threshold = Some(t as usize);
        }
        if let Some(p) = &o.pattern {
            if id != CanonicalRule::NamingConvention {
                return Err(invalid(
                    format!("{path}.pattern"),
                    "only naming-convention takes a pattern",
                ));
            }
            Regex::new(p).map_err(|e| invalid(format!("{path}.pattern"), e.to_string()))?;
            rule.pattern = Some(p.clone());
        }
        if let Some(e) = o.effort_minutes {
            if !(e > 0.0 && e.is_finite()) {
                return Err(invalid(
                    format!("{path}.effort_minutes"),
                    "must be a positive number",
                ));
            }
            rule.effort_to_fix_minutes = e;
        }
        if let Some(enabled) = o.enabled {
            rule.enabled = enabled;
        }
    }
    Ok(())
}

/// Builds the rule set for `profile`: defaults, then common overrides, then
/// profile-specific ones. The unit-size threshold is scaled by the profile's
/// verbosity factor.
pub fn load_rule_set(config: &RulesConfig, profile: &LanguageProfile) -> Result<RuleSet> {
    for key in config.profiles.keys() {
        if key.trim().is_empty() {
            return Err(invalid("profiles", "empty profile id"));
        }
    }
    let mut rules: BTreeMap<CanonicalRule, Rule> = CanonicalRule::ALL
        .into_iter()
        .map(|id| {
            let rule = Rule {
                canonical_id: id,
                profile_id: profile.id().to_string(),
                threshold: None,
                base_threshold: id.default_threshold(),
                pattern: (id == CanonicalRule::NamingConvention)
                    .then(|| profile.naming_pattern().unwrap_or(".*").to_string()),
                effort_to_fix_minutes: id.default_effort(),
                enabled: id != CanonicalRule::DuplicationBlock,
            };
            (id, rule)
        })
        .collect();
    apply_overrides(&mut rules, &config.common, "")?;
    if let Some(section) = config.profiles.get(profile.id()) {
        apply_overrides(&mut rules, section, &format!("profiles.{}.", profile.id()))?;
    }
    for rule in rules.values_mut() {
        rule.threshold = rule.base_threshold.map(|base| {
            if rule.canonical_id == CanonicalRule::UnitSizeThreshold {
                (base as f64 * profile.verbosity_factor()).round() as usize
            } else {
                base
            }
        });
        if rule.canonical_id != CanonicalRule::UnitSizeThreshold {
            rule.base_threshold = None;
        }
    }
    Ok(RuleSet {
        profile_id: profile.id().to_string(),
        rules: rules.into_values().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Measured {
    Count(usize),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule_id: CanonicalRule,
    pub file: String,
    pub line: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit_name: Option<String>,
    pub observed_value: Measured,
    pub threshold: Measured,
    pub effort_minutes: f64,
}

/// Evaluates `rule_set` against the units of its profile and, when the
/// duplication-block rule is on, against `blocks` (already filtered to this
/// profile's files by the caller).
pub fn check_rules(
    units: &[UnitMetrics],
    blocks: &[CloneBlock],
    rule_set: &RuleSet,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let naming = rule_set
        .get(CanonicalRule::NamingConvention)
        .filter(|r| r.enabled)
        .and_then(|r| r.pattern.as_deref())
        .and_then(|p| Regex::new(p).ok());
    for u in units.iter().filter(|u| u.profile_id == rule_set.profile_id) {
        for rule in rule_set.rules.iter().filter(|r| r.enabled) {
            let observed = match rule.canonical_id {
                CanonicalRule::ComplexityThreshold => u.cc,
                CanonicalRule::UnitSizeThreshold => u.loc,
                CanonicalRule::TooManyParams => u.param_count,
                CanonicalRule::NestingDepth => u.nesting_depth_max,
                CanonicalRule::NamingConvention => {
                    if let Some(re) = &naming {
                        if !re.is_match(&u.unit.name) {
                            out.push(Violation {
                                rule_id: rule.canonical_id,
                                file: u.unit.file.clone(),
                                line: u.unit.start_line,
                                unit_name: Some(u.unit.name.clone()),
                                observed_value: Measured::Text(u.unit.name.clone()),
                                threshold: Measured::Text(re.as_str().to_string()),
                                effort_minutes: rule.effort_to_fix_minutes,
                            });
                        }
                    }
                    continue;
                }
                CanonicalRule::DuplicationBlock => continue,
            };
            let Some(threshold) = rule.threshold else {
                continue;
            };
            if observed > threshold {
                out.push(Violation {
                    rule_id: rule.canonical_id,
                    file: u.unit.file.clone(),
                    line: u.unit.start_line,
                    unit_name: Some(u.unit.name.clone()),
                    observed_value: Measured::Count(observed),
                    threshold: Measured::Count(threshold),
                    effort_minutes: rule.effort_to_fix_minutes,
                });
            }
        }
    }
    if let Some(rule) = rule_set
        .get(CanonicalRule::DuplicationBlock)
        .filter(|r| r.enabled)
    {
        for block in blocks {
            out.push(Violation {
                rule_id: rule.canonical_id,
                file: block.a.file.clone(),
                line: block.a.start_line,
                unit_name: None,
                observed_value: Measured::Count(block.length_tokens),
                threshold: Measured::Count(0),
                effort_minutes: rule.effort_to_fix_minutes,
            });
        }
    }
    sort_violations(&mut out);
    out
}

pub fn sort_violations(v: &mut [Violation]) {
    v.sort_by(|a, b| {
        (&a.file, a.line, a.rule_id, &a.unit_name).cmp(&(&b.file, b.line, b.rule_id, &b.unit_name))
    });
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub rule_sets: Vec<RuleSet>,
    pub shared: Vec<CanonicalRule>,
    /// Set when nothing is left in common.
    pub warning: Option<String>,
}

/// Keeps only the rules enabled in every input. Thresholds and patterns stay
/// per language; only rule presence is intersected.
pub fn intersect_rule_sets(rule_sets: &[RuleSet]) -> Result<Intersection> {
    let Some(first) = rule_sets.first() else {
        return Err(Error::InvalidConfig("no rule sets to intersect".into()));
    };
    let shared: BTreeSet<CanonicalRule> = rule_sets
        .iter()
        .skip(1)
        .fold(first.enabled_ids(), |acc, rs| {
            acc.intersection(&rs.enabled_ids()).copied().collect()
        });
    let filtered = rule_sets
        .iter()
        .map(|rs| RuleSet {
            profile_id: rs.profile_id.clone(),
            rules: rs
                .rules
                .iter()
                .filter(|r| r.enabled && shared.contains(&r.canonical_id))
                .cloned()
                .collect(),
        })
        .collect();
    let warning = shared
        .is_empty()
        .then(|| "no rule is enabled in every rule set; technical debt will be zero".to_string());
    Ok(Intersection {
        rule_sets: filtered,
        shared: shared.into_iter().collect(),
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::HalsteadCounts;
    use crate::profile::ProfileRegistry;
    use crate::units::Unit;

    fn profile(id: &str) -> LanguageProfile {
        ProfileRegistry::builtin().get(id).unwrap().clone()
    }

    fn config(json: serde_json::Value) -> RulesConfig {
        serde_json::from_value(json).unwrap()
    }

    fn unit(name: &str, cc: usize, loc: usize, params: usize, depth: usize) -> UnitMetrics {
        UnitMetrics {
            unit: Unit {
                name: name.into(),
                file: "a.c".into(),
                start_line: 1,
                end_line: loc.max(1),
                param_count: params,
                token_range: 0..1,
                nesting_depth_max: depth,
                nested: vec![],
                nested_lines: vec![],
            },
            profile_id: "c-family".into(),
            loc,
            cc,
            param_count: params,
            halstead: HalsteadCounts::default(),
            nesting_depth_max: depth,
            verbosity_factor: 1.0,
        }
    }

    #[test]
    fn empty_config_gives_defaults() {
        let rs = load_rule_set(&RulesConfig::default(), &profile("c-family")).unwrap();
        let enabled: Vec<_> = rs.enabled_ids().into_iter().collect();
        assert_eq!(enabled.len(), 5);
        assert!(!enabled.contains(&CanonicalRule::DuplicationBlock));
        assert_eq!(
            rs.get(CanonicalRule::ComplexityThreshold)
                .unwrap()
                .threshold,
            Some(15)
        );
        assert_eq!(
            rs.get(CanonicalRule::UnitSizeThreshold).unwrap().threshold,
            Some(60)
        );
        assert_eq!(
            rs.get(CanonicalRule::TooManyParams).unwrap().threshold,
            Some(5)
        );
        assert_eq!(
            rs.get(CanonicalRule::NestingDepth).unwrap().threshold,
            Some(4)
        );
        assert_eq!(
            rs.get(CanonicalRule::NamingConvention)
                .unwrap()
                .pattern
                .as_deref(),
            Some("^[a-z][a-zA-Z0-9]*$")
        );
    }

    #[test]
    fn threshold_passthrough() {
        let c = config(serde_json::json!({"complexity-threshold": {"threshold": 15}}));
        let rs = load_rule_set(&c, &profile("python")).unwrap();
        assert_eq!(
            rs.get(CanonicalRule::ComplexityThreshold)
                .unwrap()
                .threshold,
            Some(15)
        );
        let c = config(
            serde_json::json!({"complexity-threshold": {"threshold": 12, "effort_minutes": 90}}),
        );
        let rs = load_rule_set(&c, &profile("python")).unwrap();
        let r = rs.get(CanonicalRule::ComplexityThreshold).unwrap();
        assert_eq!((r.threshold, r.effort_to_fix_minutes), (Some(12), 90.0));
    }

    #[test]
    fn unit_size_scaled_by_verbosity() {
        let rs = load_rule_set(&RulesConfig::default(), &profile("cobol-like")).unwrap();
        let r = rs.get(CanonicalRule::UnitSizeThreshold).unwrap();
        assert_eq!((r.base_threshold, r.threshold), (Some(60), Some(120)));
    }

    #[test]
    fn profile_section_overrides_common() {
        let c = config(serde_json::json!({
            "nesting-depth": {"threshold": 3},
            "profiles": {"python": {"nesting-depth": {"threshold": 6}}}
        }));
        let py = load_rule_set(&c, &profile("python")).unwrap();
        let cf = load_rule_set(&c, &profile("c-family")).unwrap();
        assert_eq!(
            py.get(CanonicalRule::NestingDepth).unwrap().threshold,
            Some(6)
        );
        assert_eq!(
            cf.get(CanonicalRule::NestingDepth).unwrap().threshold,
            Some(3)
        );
    }

    #[test]
    fn invalid_configs_name_the_key() {
        let cases = [
            (serde_json::json!({"hiding": {}}), "hiding"),
            (
                serde_json::json!({"too-many-params": {"threshold": -1}}),
                "too-many-params.threshold",
            ),
            (
                serde_json::json!({"too-many-params": {"effort_minutes": 0}}),
                "too-many-params.effort_minutes",
            ),
            (
                serde_json::json!({"naming-convention": {"pattern": "("}}),
                "naming-convention.pattern",
            ),
            (
                serde_json::json!({"nesting-depth": {"limit": 3}}),
                "nesting-depth",
            ),
            (
                serde_json::json!({"profiles": {"python": {"bogus": {}}}}),
                "profiles.python.bogus",
            ),
        ];
        for (json, expected) in cases {
            match load_rule_set(&config(json), &profile("python")) {
                Err(Error::InvalidRuleConfig { key, .. }) => assert_eq!(key, expected),
                other => panic!("expected InvalidRuleConfig for {expected}, got {other:?}"),
            }
        }
    }

    #[test]
    fn compliant_units_no_violations() {
        let rs = load_rule_set(&RulesConfig::default(), &profile("c-family")).unwrap();
        assert!(check_rules(&[unit("doThing", 3, 10, 2, 1)], &[], &rs).is_empty());
    }

    #[test]
    fn complexity_violation() {
        let c = config(serde_json::json!({"complexity-threshold": {"threshold": 20}}));
        let rs = load_rule_set(&c, &profile("c-family")).unwrap();
        let v = check_rules(&[unit("busy", 25, 10, 0, 0)], &[], &rs);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule_id, CanonicalRule::ComplexityThreshold);
        assert_eq!(v[0].observed_value, Measured::Count(25));
        assert_eq!(v[0].threshold, Measured::Count(20));
        assert_eq!(v[0].effort_minutes, 60.0);
    }

    #[test]
    fn naming_violation() {
        let rs = load_rule_set(&RulesConfig::default(), &profile("c-family")).unwrap();
        let v = check_rules(&[unit("Do_Thing", 1, 1, 0, 0)], &[], &rs);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule_id, CanonicalRule::NamingConvention);
        assert_eq!(v[0].effort_minutes, 10.0);
    }

    #[test]
    fn every_rule_fires_once_per_unit() {
        let rs = load_rule_set(&RulesConfig::default(), &profile("c-family")).unwrap();
        let v = check_rules(&[unit("Bad_Name", 16, 61, 6, 5)], &[], &rs);
        let ids: Vec<_> = v.iter().map(|v| v.rule_id).collect();
        assert_eq!(
            ids,
            [
                CanonicalRule::ComplexityThreshold,
                CanonicalRule::UnitSizeThreshold,
                CanonicalRule::TooManyParams,
                CanonicalRule::NestingDepth,
                CanonicalRule::NamingConvention
            ]
        );
        let total: f64 = v.iter().map(|v| v.effort_minutes).sum();
        assert_eq!(total, 60.0 + 45.0 + 20.0 + 30.0 + 10.0);
    }

    fn ids(rs: &RuleSet, list: &[CanonicalRule]) -> RuleSet {
        let mut rs = rs.clone();
        for r in &mut rs.rules {
            r.enabled = list.contains(&r.canonical_id);
        }
        rs
    }

    #[test]
    fn intersection_examples() {
        use CanonicalRule::*;
        let base = load_rule_set(&RulesConfig::default(), &profile("c-family")).unwrap();
        let same = intersect_rule_sets(&[base.clone(), base.clone()]).unwrap();
        assert_eq!(same.rule_sets[0].enabled_ids(), base.enabled_ids());
        assert!(same.warning.is_none());

        let a = ids(
            &base,
            &[ComplexityThreshold, UnitSizeThreshold, NamingConvention],
        );
        let b = ids(
            &base,
            &[ComplexityThreshold, UnitSizeThreshold, NestingDepth],
        );
        let i = intersect_rule_sets(&[a, b]).unwrap();
        assert_eq!(i.shared, [ComplexityThreshold, UnitSizeThreshold]);
        assert!(i.rule_sets.iter().all(|rs| rs.rules.len() == 2));

        let a = ids(&base, &[NamingConvention]);
        let b = ids(&base, &[]);
        let i = intersect_rule_sets(&[a, b]).unwrap();
        assert!(i.shared.is_empty());
        assert!(i.warning.is_some());
    }

    #[test]
    fn intersection_keeps_per_language_params() {
        let py = load_rule_set(&RulesConfig::default(), &profile("python")).unwrap();
        let cobol = load_rule_set(&RulesConfig::default(), &profile("cobol-like")).unwrap();
        let i = intersect_rule_sets(&[py, cobol]).unwrap();
        let sizes: Vec<_> = i
            .rule_sets
            .iter()
            .map(|rs| rs.get(CanonicalRule::UnitSizeThreshold).unwrap().threshold)
            .collect();
        assert_eq!(sizes, [Some(60), Some(120)]);
    }
}
