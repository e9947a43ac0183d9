//! Run configuration: one JSON document with optional sections.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::composite::CompositeConfig;
use crate::duplication::{NormalizationMode, DEFAULT_MIN_TOKENS};
use crate::error::{Error, Result};
use crate::metrics::{Averaging, ModuleGranularity};
use crate::models::sqale::DEFAULT_COST_PER_LINE_MINUTES;
use crate::models::SigConfig;
use crate::profile::{LanguageProfile, ProfileRegistry, ProfileSpec};
use crate::rules::{load_rule_set, RuleSet, RulesConfig};

/// Environment variable consulted when no `--config` is given.
pub const CONFIG_ENV: &str = "XMAINT_CONFIG";

/// Directory names skipped during discovery unless overridden.
pub const DEFAULT_EXCLUDES: [&str; 9] = [
    ".git",
    ".hg",
    ".svn",
    "target",
    "build",
    "node_modules",
    "dist",
    "__pycache__",
    ".venv",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiConfig {
    pub averaging: Averaging,
    pub module: ModuleGranularity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqaleConfig {
    pub cost_per_line_minutes: f64,
}

impl Default for SqaleConfig {
    fn default() -> Self {
        Self {
            cost_per_line_minutes: DEFAULT_COST_PER_LINE_MINUTES,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsConfig {
    pub mi: MiConfig,
    pub sqale: SqaleConfig,
    pub sig: SigConfig,
    /// Externally measured test coverage in [0, 1], rated by the SIG model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DuplicationConfig {
    pub min_tokens: usize,
    pub mode: NormalizationMode,
}

impl Default for DuplicationConfig {
    fn default() -> Self {
        Self {
            min_tokens: DEFAULT_MIN_TOKENS,
            mode: NormalizationMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscoveryConfig {
    /// Glob patterns over `/`-separated paths relative to the project root.
    /// Empty means everything.
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    /// Directory names pruned anywhere in the tree.
    pub default_excludes: Vec<String>,
    /// Forces one profile for every file instead of detecting by extension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self {
            include: Vec::new(),
            exclude: Vec::new(),
            default_excludes: DEFAULT_EXCLUDES.iter().map(|s| s.to_string()).collect(),
            profile: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    #[serde(alias = "markdown")]
    Md,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "md" | "markdown" => Ok(Self::Md),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub format: ReportFormat,
    /// Run the weight-sensitivity analysis in `compare`.
    pub sensitivity: bool,
    /// List every clone block and violation instead of counts only.
    pub details: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Extra profiles, or replacements for built-in ones with the same id.
    pub profiles: Vec<ProfileSpec>,
    pub rules: RulesConfig,
    pub models: ModelsConfig,
    pub composite: CompositeConfig,
    pub duplication: DuplicationConfig,
    pub discovery: DiscoveryConfig,
    pub report: ReportConfig,
}

impl Config {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json(context, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Loads `explicit`, else the file named by `XMAINT_CONFIG`, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    /// Built-in profiles with the configured ones layered on top.
    pub fn registry(&self) -> Result<ProfileRegistry> {
        let mut registry = ProfileRegistry::builtin();
        for spec in &self.profiles {
            registry.insert(LanguageProfile::from_spec(spec.clone())?)?;
        }
        Ok(registry)
    }

    /// Effective rule set of every known profile, keyed by profile id.
    pub fn rule_sets(&self, registry: &ProfileRegistry) -> Result<BTreeMap<String, RuleSet>> {
        for id in self.rules.profiles.keys() {
            registry.get(id).map_err(|_| Error::InvalidRuleConfig {
                key: format!("profiles.{id}"),
                reason: "no such profile".into(),
            })?;
        }
        registry
            .iter()
            .map(|p| Ok((p.id().to_string(), load_rule_set(&self.rules, p)?)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let registry = self.registry()?;
        self.rule_sets(&registry)?;
        self.models.sig.validate()?;
        self.composite.validate()?;
        let cost = self.models.sqale.cost_per_line_minutes;
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(Error::InvalidConfig(
                "models.sqale.cost_per_line_minutes must be positive".into(),
            ));
        }
        if let Some(c) = self.models.coverage {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidConfig(
                    "models.coverage must lie in [0, 1]".into(),
                ));
            }
        }
        if self.duplication.min_tokens < 2 {
            return Err(Error::InvalidConfig(
                "duplication.min_tokens must be at least 2".into(),
            ));
        }
        if let Some(p) = &self.discovery.profile {
            registry.get(p)?;
        }
        for pattern in self.discovery.include.iter().chain(&self.discovery.exclude) {
            globset::Glob::new(pattern)
                .map_err(|e| Error::InvalidConfig(format!("bad glob `{pattern}`: {e}")))?;
        }
        Ok(())
    }

    /// Everything that changes measured values: effective profiles and rule
    /// sets, model parameters, composite mappings, duplication settings.
    /// Discovery and report options are left out.
    pub fn comparability_view(&self) -> Result<serde_json::Value> {
        let registry = self.registry()?;
        let profiles: BTreeMap<&str, &ProfileSpec> =
            registry.iter().map(|p| (p.id(), p.spec())).collect();
        let rules = self.rule_sets(&registry)?;
        let value = serde_json::json!({
            "profiles": profiles,
            "rules": rules,
            "models": self.models,
            "composite": self.composite,
            "duplication": self.duplication,
        });
        // Round-trip through Value so every map ends up key-sorted.
        serde_json::to_value(value).map_err(|e| Error::json("config", e))
    }

    /// Hex sha256 of the canonical comparability view.
    pub fn config_hash(&self) -> Result<String> {
        let canonical = serde_json::to_string(&self.comparability_view()?)
            .map_err(|e| Error::json("config", e))?;
        Ok(hex(&Sha256::digest(canonical.as_bytes())))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
