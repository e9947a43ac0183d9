//! The per-project pipeline: discover files, measure them, detect clones,
//! then check rules and apply the assessment models.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::composite::{
    composite_scores, sensitivity_analysis, validate_single_counting, CompositeOutcome,
    ProjectIndicators, SensitivityReport,
};
use crate::config::{Config, DiscoveryConfig};
use crate::duplication::{
    analyze_duplication, normalize_tokens, DuplicationReport, FileTokens, NormalizationMode,
};
use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::lexer::{physical_lines, tokenize};
use crate::lines::classify_lines;
use crate::metrics::{
    aggregate_project, cyclomatic_complexity, halstead, unit_metrics, FileMetrics, ProjectMetrics,
};
use crate::models::mi::project_mi;
use crate::models::sig::assess as sig_assess;
use crate::models::{production_effort, technical_debt_ratio, MiResult, SigResult, TdrResult};
use crate::profile::{LanguageProfile, ProfileRegistry};
use crate::rules::{
    check_rules, intersect_rule_sets, sort_violations, CanonicalRule, Intersection, RuleSet,
    Violation,
};

/// A file picked up by discovery.
#[derive(Debug, Clone)]
pub struct Discovered {
    /// `/`-separated path relative to the project root.
    pub rel_path: String,
    pub abs_path: PathBuf,
    pub profile_id: String,
}

fn glob_set(patterns: &[String]) -> Result<Option<GlobSet>> {
    if patterns.is_empty() {
        return Ok(None);
    }
    let mut builder = GlobSetBuilder::new();
    for p in patterns {
        builder
            .add(Glob::new(p).map_err(|e| Error::InvalidConfig(format!("bad glob `{p}`: {e}")))?);
    }
    builder
        .build()
        .map(Some)
        .map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    let rel = if rel.as_os_str().is_empty() {
        Path::new(path.file_name().unwrap_or(path.as_os_str()))
    } else {
        rel
    };
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Walks `root` (a directory or a single file) without following symlinks.
/// Files whose extension matches no profile are skipped unless a profile is
/// forced. Output is sorted by relative path.
pub fn discover(
    root: &Path,
    discovery: &DiscoveryConfig,
    registry: &ProfileRegistry,
) -> Result<Vec<Discovered>> {
    let meta = std::fs::metadata(root).map_err(|e| Error::io(root, e))?;
    let include = glob_set(&discovery.include)?;
    let exclude = glob_set(&discovery.exclude)?;
    let forced = match &discovery.profile {
        Some(id) => Some(registry.get(id)?),
        None => None,
    };
    let pruned: BTreeSet<&str> = discovery
        .default_excludes
        .iter()
        .map(String::as_str)
        .collect();
    let mut out = Vec::new();
    let walker = WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| {
            e.depth() == 0
                || !(e.file_type().is_dir()
                    && pruned.contains(e.file_name().to_string_lossy().as_ref()))
        });
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel_path = if meta.is_file() {
            relative(root.parent().unwrap_or(root), entry.path())
        } else {
            relative(root, entry.path())
        };
        if include.as_ref().is_some_and(|g| !g.is_match(&rel_path)) {
            continue;
        }
        if exclude.as_ref().is_some_and(|g| g.is_match(&rel_path)) {
            continue;
        }
        let profile = match forced {
            Some(p) => p,
            None => match registry.detect(entry.path()) {
                Ok(p) => p,
                Err(Error::UnknownLanguage { .. }) => continue,
                Err(e) => return Err(e),
            },
        };
        out.push(Discovered {
            rel_path,
            abs_path: entry.path().to_path_buf(),
            profile_id: profile.id().to_string(),
        });
    }
    out.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
    Ok(out)
}

/// One source file held in memory.
#[derive(Debug, Clone)]
pub struct SourceText {
    pub path: String,
    pub profile_id: String,
    pub content: String,
}

/// Reads discovered files. Unreadable or non-UTF-8 files become diagnostics.
pub fn read_sources(files: &[Discovered]) -> (Vec<SourceText>, Vec<Diagnostic>) {
    let mut sources = Vec::new();
    let mut diagnostics = Vec::new();
    for f in files {
        match std::fs::read(&f.abs_path) {
            Err(e) => diagnostics.push(Diagnostic::new(
                &f.rel_path,
                None,
                DiagnosticKind::Unreadable,
                e.to_string(),
            )),
            Ok(bytes) => match String::from_utf8(bytes) {
                Err(e) => diagnostics.push(Diagnostic::new(
                    &f.rel_path,
                    None,
                    DiagnosticKind::InvalidEncoding,
                    format!("not valid UTF-8 ({e})"),
                )),
                Ok(text) => sources.push(SourceText {
                    path: f.rel_path.clone(),
                    profile_id: f.profile_id.clone(),
                    content: text
                        .strip_prefix('\u{feff}')
                        .map(str::to_string)
                        .unwrap_or(text),
                }),
            },
        }
    }
    (sources, diagnostics)
}

struct Measured {
    metrics: FileMetrics,
    tokens: FileTokens,
    diagnostics: Vec<Diagnostic>,
}

fn measure(source: &SourceText, profile: &LanguageProfile, mode: NormalizationMode) -> Measured {
    let tokenized = tokenize(&source.content, profile);
    let lines = classify_lines(&tokenized.tokens, physical_lines(&source.content));
    let segmented = crate::units::extract_units(&tokenized.tokens, profile);
    let units = segmented
        .units
        .iter()
        .map(|u| {
            let mut u = u.clone();
            u.file = source.path.clone();
            unit_metrics(&u, &tokenized.tokens, &lines, profile)
        })
        .collect();
    let code: Vec<_> = tokenized
        .tokens
        .iter()
        .filter(|t| !t.is_comment())
        .collect();
    let mut diagnostics: Vec<Diagnostic> = tokenized
        .issues
        .into_iter()
        .chain(segmented.issues)
        .map(|i| i.into_diagnostic(&source.path))
        .collect();
    diagnostics.sort();
    Measured {
        metrics: FileMetrics {
            path: source.path.clone(),
            profile_id: profile.id().to_string(),
            lines: lines.totals,
            code_tokens: code.len(),
            cc: cyclomatic_complexity(code.iter().copied(), profile),
            halstead: halstead(code.iter().copied(), profile),
            units,
        },
        tokens: FileTokens {
            path: source.path.clone(),
            tokens: normalize_tokens(&tokenized.tokens, mode),
            loc_lines: lines.totals.loc(),
        },
        diagnostics,
    }
}

#[cfg(feature = "parallel")]
fn measure_all(
    sources: &[SourceText],
    registry: &ProfileRegistry,
    mode: NormalizationMode,
) -> Result<Vec<Measured>> {
    use rayon::prelude::*;
    sources
        .par_iter()
        .map(|s| Ok(measure(s, registry.get(&s.profile_id)?, mode)))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn measure_all(
    sources: &[SourceText],
    registry: &ProfileRegistry,
    mode: NormalizationMode,
) -> Result<Vec<Measured>> {
    sources
        .iter()
        .map(|s| Ok(measure(s, registry.get(&s.profile_id)?, mode)))
        .collect()
}

/// Measurements of one code base, before any rule or model is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectAnalysis {
    pub project_id: String,
    pub files: Vec<FileMetrics>,
    pub metrics: ProjectMetrics,
    pub duplication: DuplicationReport,
    pub diagnostics: Vec<Diagnostic>,
}

impl ProjectAnalysis {
    pub fn profiles_used(&self) -> BTreeSet<String> {
        self.files.iter().map(|f| f.profile_id.clone()).collect()
    }
}

/// Measures in-memory sources. `diagnostics` carries problems found before
/// this point (discovery, reading).
pub fn analyze_sources(
    project_id: &str,
    sources: &[SourceText],
    mut diagnostics: Vec<Diagnostic>,
    config: &Config,
    registry: &ProfileRegistry,
) -> Result<ProjectAnalysis> {
    if sources.is_empty() {
        return Err(Error::EmptyProject);
    }
    let mut sorted: Vec<SourceText> = sources.to_vec();
    sorted.sort_by(|a, b| a.path.cmp(&b.path));
    let measured = measure_all(&sorted, registry, config.duplication.mode)?;
    let mut files = Vec::with_capacity(measured.len());
    let mut streams = Vec::with_capacity(measured.len());
    for m in measured {
        diagnostics.extend(m.diagnostics);
        files.push(m.metrics);
        streams.push(m.tokens);
    }
    diagnostics.sort();
    let metrics = aggregate_project(&files, config.models.mi.averaging, config.models.mi.module)?;
    let duplication = analyze_duplication(
        &streams,
        config.duplication.min_tokens,
        config.duplication.mode,
    );
    Ok(ProjectAnalysis {
        project_id: project_id.to_string(),
        files,
        metrics,
        duplication,
        diagnostics,
    })
}

/// Default project id: the root's final path component.
pub fn project_id_for(root: &Path) -> String {
    let canonical = root.canonicalize().unwrap_or_else(|_| root.to_path_buf());
    let path = if canonical.is_file() {
        canonical
            .file_stem()
            .map(PathBuf::from)
            .unwrap_or(canonical)
    } else {
        canonical
    };
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .filter(|n| !n.is_empty())
        .unwrap_or_else(|| "project".to_string())
}

/// Discovers, reads and measures the code base at `root`.
pub fn analyze_path(
    root: &Path,
    project_id: &str,
    config: &Config,
    registry: &ProfileRegistry,
) -> Result<ProjectAnalysis> {
    let discovered = discover(root, &config.discovery, registry)?;
    let (sources, diagnostics) = read_sources(&discovered);
    analyze_sources(project_id, &sources, diagnostics, config, registry)
}

/// Rule and model outcomes for one analysed project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub violations: Vec<Violation>,
    pub violation_counts: BTreeMap<CanonicalRule, usize>,
    /// Enabled rules the project was checked against.
    pub rule_ids: BTreeSet<CanonicalRule>,
    /// Absent when the project has no units.
    pub mi: Option<MiResult>,
    pub tdr: TdrResult,
    pub sig: SigResult,
    pub cost_per_line_minutes: f64,
}

/// Checks every file against the rule set of its profile and applies MI,
/// SQALE and SIG. `rule_sets` must cover every profile used.
pub fn assess_project(
    analysis: &ProjectAnalysis,
    rule_sets: &BTreeMap<String, RuleSet>,
    config: &Config,
) -> Result<Assessment> {
    let mut violations = Vec::new();
    let mut rule_ids = BTreeSet::new();
    for profile_id in analysis.profiles_used() {
        let rule_set = rule_sets
            .get(&profile_id)
            .ok_or_else(|| Error::UnknownProfile(profile_id.clone()))?;
        rule_ids.extend(rule_set.enabled_ids());
        let files: BTreeSet<&str> = analysis
            .files
            .iter()
            .filter(|f| f.profile_id == profile_id)
            .map(|f| f.path.as_str())
            .collect();
        let units: Vec<_> = analysis
            .files
            .iter()
            .filter(|f| f.profile_id == profile_id)
            .flat_map(|f| f.units.iter().cloned())
            .collect();
        let blocks: Vec<_> = analysis
            .duplication
            .blocks
            .iter()
            .filter(|b| files.contains(b.a.file.as_str()))
            .cloned()
            .collect();
        violations.extend(check_rules(&units, &blocks, rule_set));
    }
    sort_violations(&mut violations);
    let mut violation_counts = BTreeMap::new();
    for v in &violations {
        *violation_counts.entry(v.rule_id).or_insert(0) += 1;
    }
    let mi = match project_mi(&analysis.metrics) {
        Ok(mi) => Some(mi),
        Err(Error::MissingUnits) => None,
        Err(e) => return Err(e),
    };
    let cost = config.models.sqale.cost_per_line_minutes;
    let tdr = technical_debt_ratio(
        &violations,
        production_effort(analysis.metrics.total_loc, cost),
    )?;
    let units: Vec<_> = analysis
        .files
        .iter()
        .flat_map(|f| f.units.iter().cloned())
        .collect();
    let sig = sig_assess(
        &units,
        analysis.metrics.total_loc,
        duplication_ratio(&analysis.duplication, config),
        config.models.coverage,
        &config.models.sig,
    )?;
    Ok(Assessment {
        violations,
        violation_counts,
        rule_ids,
        mi,
        tdr,
        sig,
        cost_per_line_minutes: cost,
    })
}

/// The duplication ratio selected by the composite's basis setting.
pub fn duplication_ratio(report: &DuplicationReport, config: &Config) -> f64 {
    match config.composite.duplication_basis {
        crate::composite::DuplicationBasis::Token => report.duplicated_token_ratio,
        crate::composite::DuplicationBasis::Line => report.duplicated_line_ratio,
    }
}

/// Outcome of comparing several projects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub intersection: Intersection,
    /// In the order the analyses were given.
    pub assessments: Vec<Assessment>,
    pub composite: CompositeOutcome,
    pub sensitivity: Option<SensitivityReport>,
}

/// Intersects the rule sets of every profile involved, rejects double
/// counting, assesses each project and ranks them.
pub fn compare_projects(
    analyses: &[ProjectAnalysis],
    config: &Config,
    registry: &ProfileRegistry,
    sensitivity: bool,
) -> Result<Comparison> {
    if analyses.len() < 2 {
        return Err(Error::InvalidConfig(
            "compare needs at least two projects".into(),
        ));
    }
    let all = config.rule_sets(registry)?;
    let used: BTreeSet<String> = analyses.iter().flat_map(|a| a.profiles_used()).collect();
    let involved: Vec<RuleSet> = used
        .iter()
        .map(|id| {
            all.get(id)
                .cloned()
                .ok_or_else(|| Error::UnknownProfile(id.clone()))
        })
        .collect::<Result<_>>()?;
    let intersection = intersect_rule_sets(&involved)?;
    validate_single_counting(&config.composite, &intersection.rule_sets)?;
    let rule_sets: BTreeMap<String, RuleSet> = intersection
        .rule_sets
        .iter()
        .map(|rs| (rs.profile_id.clone(), rs.clone()))
        .collect();
    let assessments: Vec<Assessment> = analyses
        .iter()
        .map(|a| assess_project(a, &rule_sets, config))
        .collect::<Result<_>>()?;
    let shared: BTreeSet<CanonicalRule> = intersection.shared.iter().copied().collect();
    let indicators: Vec<ProjectIndicators> = analyses
        .iter()
        .zip(&assessments)
        .map(|(a, s)| ProjectIndicators {
            project_id: a.project_id.clone(),
            comment_ratio: Some(a.metrics.comment_ratio),
            duplication_ratio: Some(duplication_ratio(&a.duplication, config)),
            tdr: Some(s.tdr.tdr),
            total_loc: a.metrics.total_loc,
            cost_per_line_minutes: s.cost_per_line_minutes,
            rule_ids: shared.clone(),
        })
        .collect();
    let composite = composite_scores(&indicators, &config.composite)?;
    let sensitivity = sensitivity.then(|| {
        let mapped = composite
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
        sensitivity_analysis(
            &mapped,
            &config.composite.weights(),
            config.composite.sensitivity.delta_pp,
        )
    });
    Ok(Comparison {
        intersection,
        assessments,
        composite,
        sensitivity,
    })
}
