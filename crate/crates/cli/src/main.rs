use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use xmaint_core::analysis::{
    analyze_path, assess_project, compare_projects, project_id_for, ProjectAnalysis,
};
use xmaint_core::config::{Config, ReportFormat};
use xmaint_core::duplication::NormalizationMode;
use xmaint_core::profile::ProfileRegistry;
use xmaint_core::report::{self, render, render_snapshot_list, render_trend};
use xmaint_core::snapshot::{NewSnapshot, SnapshotStore};

/// Cross-language maintainability measurement.
#[derive(Parser, Debug)]
#[command(name = "xmaint", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measure one code base.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
        /// Project id used in the report (default: directory name).
        #[arg(long)]
        project_id: Option<String>,
    },
    /// Rank several code bases with the weighted composite.
    Compare {
        #[arg(required = true, num_args = 2..)]
        paths: Vec<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
        /// Re-rank under ±delta weight perturbations.
        #[arg(long)]
        sensitivity: bool,
        /// Perturbation size in percentage points.
        #[arg(long)]
        delta_pp: Option<f64>,
    },
    /// Save or list analysis snapshots.
    Snapshot {
        #[command(subcommand)]
        action: SnapshotCmd,
    },
    /// Show how one summary metric evolved across snapshots.
    Trend {
        project_id: String,
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        metric: String,
        /// Do not flag points measured under another configuration.
        #[arg(long)]
        force: bool,
        #[arg(long, value_parser = parse_format)]
        format: Option<ReportFormat>,
    },
    /// Inspect effective rule sets.
    Rules {
        #[command(subcommand)]
        action: RulesCmd,
    },
    /// Inspect language profiles.
    Profiles {
        #[command(subcommand)]
        action: ProfilesCmd,
    },
}

#[derive(Subcommand, Debug)]
enum SnapshotCmd {
    /// Analyse a code base and append its summary to the store.
    Save {
        path: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long)]
        project_id: Option<String>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List stored snapshots.
    List {
        /// Code base whose snapshots to list (default: all).
        path: Option<PathBuf>,
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        project_id: Option<String>,
        #[arg(long, value_parser = parse_format)]
        format: Option<ReportFormat>,
    },
}

#[derive(Subcommand, Debug)]
enum RulesCmd {
    List {
        #[arg(long)]
        profile: String,
        #[arg(long, env = "XMAINT_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_format)]
        format: Option<ReportFormat>,
    },
}

#[derive(Subcommand, Debug)]
enum ProfilesCmd {
    List {
        #[arg(long, env = "XMAINT_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_format)]
        format: Option<ReportFormat>,
    },
}

#[derive(Args, Debug, Clone)]
struct RunOpts {
    /// Force one profile for every file.
    #[arg(long)]
    profile: Option<String>,
    /// JSON config file (falls back to $XMAINT_CONFIG).
    #[arg(long, env = "XMAINT_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<ReportFormat>,
    #[arg(long)]
    min_tokens: Option<usize>,
    /// Production cost per line of code, in minutes.
    #[arg(long)]
    cost_per_line: Option<f64>,
    /// exact or identifier-blind.
    #[arg(long)]
    duplication_mode: Option<NormalizationMode>,
    /// Glob of files to include (repeatable).
    #[arg(long)]
    include: Vec<String>,
    /// Glob of files to exclude (repeatable).
    #[arg(long)]
    exclude: Vec<String>,
    /// Externally measured test coverage in [0, 1].
    #[arg(long)]
    coverage: Option<f64>,
    /// List every clone block and violation.
    #[arg(long)]
    details: bool,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, String> {
    s.parse().map_err(|e: xmaint_core::Error| e.to_string())
}

impl RunOpts {
    fn config(&self) -> Result<Config> {
        let mut c = Config::resolve(self.config.as_deref()).context("loading configuration")?;
        if let Some(p) = &self.profile {
            c.discovery.profile = Some(p.clone());
        }
        if let Some(f) = self.format {
            c.report.format = f;
        }
        if let Some(n) = self.min_tokens {
            c.duplication.min_tokens = n;
        }
        if let Some(m) = self.duplication_mode {
            c.duplication.mode = m;
        }
        if let Some(x) = self.cost_per_line {
            c.models.sqale.cost_per_line_minutes = x;
        }
        if let Some(x) = self.coverage {
            c.models.coverage = Some(x);
        }
        c.discovery.include.extend(self.include.iter().cloned());
        c.discovery.exclude.extend(self.exclude.iter().cloned());
        c.report.details |= self.details;
        Ok(c)
    }

    fn run_block(&self, command: &str, paths: &[PathBuf], project_ids: &[String]) -> Value {
        json!({
            "command": command,
            "paths": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "projectIds": project_ids,
            "configFile": self.config.as_ref().map(|p| p.display().to_string()),
            "output": self.output.as_ref().map(|p| p.display().to_string()),
        })
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn prepared(opts: &RunOpts) -> Result<(Config, ProfileRegistry)> {
    let config = opts.config()?;
    config.validate()?;
    let registry = config.registry()?;
    Ok((config, registry))
}

fn status(has_diagnostics: bool) -> ExitCode {
    if has_diagnostics {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn unique_ids(paths: &[PathBuf]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    paths
        .iter()
        .map(|p| {
            let base = project_id_for(p);
            let mut id = base.clone();
            let mut n = 2;
            while !seen.insert(id.clone()) {
                id = format!("{base}-{n}");
                n += 1;
            }
            id
        })
        .collect()
}

fn analyze(path: &Path, opts: &RunOpts, project_id: Option<String>) -> Result<ExitCode> {
    let (config, registry) = prepared(opts)?;
    let id = project_id.unwrap_or_else(|| project_id_for(path));
    let analysis = analyze_path(path, &id, &config, &registry)
        .with_context(|| format!("analysing {}", path.display()))?;
    let assessment = assess_project(&analysis, &config.rule_sets(&registry)?, &config)?;
    let effective = report::effective_config(
        &config,
        opts.run_block("analyze", &[path.to_path_buf()], &[id]),
    )?;
    let r = report::analyze_report(
        &analysis,
        &assessment,
        &config,
        effective,
        &report::timestamp_now(),
    )?;
    emit(&render(&r, config.report.format), opts.output.as_deref())?;
    Ok(status(!analysis.diagnostics.is_empty()))
}

fn compare(
    paths: &[PathBuf],
    opts: &RunOpts,
    sensitivity: bool,
    delta_pp: Option<f64>,
) -> Result<ExitCode> {
    let mut opts = opts.clone();
    let mut config = opts.config()?;
    config.report.sensitivity |= sensitivity;
    if let Some(d) = delta_pp {
        config.composite.sensitivity.delta_pp = d;
    }
    config.validate()?;
    let registry = config.registry()?;
    opts.format = Some(config.report.format);
    let ids = unique_ids(paths);
    let analyses: Vec<ProjectAnalysis> = paths
        .iter()
        .zip(&ids)
        .map(|(p, id)| {
            analyze_path(p, id, &config, &registry)
                .with_context(|| format!("analysing {}", p.display()))
        })
        .collect::<Result<_>>()?;
    let comparison = compare_projects(&analyses, &config, &registry, config.report.sensitivity)?;
    if let Some(w) = &comparison.intersection.warning {
        eprintln!("warning: {w}");
    }
    let effective = report::effective_config(&config, opts.run_block("compare", paths, &ids))?;
    let r = report::compare_report(
        &analyses,
        &comparison,
        &config,
        effective,
        &report::timestamp_now(),
    )?;
    emit(&render(&r, config.report.format), opts.output.as_deref())?;
    Ok(status(analyses.iter().any(|a| !a.diagnostics.is_empty())))
}

fn snapshot_save(
    path: &Path,
    store: &Path,
    label: &str,
    project_id: Option<String>,
    opts: &RunOpts,
) -> Result<ExitCode> {
    let (config, registry) = prepared(opts)?;
    let id = project_id.unwrap_or_else(|| project_id_for(path));
    let analysis = analyze_path(path, &id, &config, &registry)
        .with_context(|| format!("analysing {}", path.display()))?;
    let assessment = assess_project(&analysis, &config.rule_sets(&registry)?, &config)?;
    let saved = SnapshotStore::open(store).save(NewSnapshot {
        project_id: id,
        label: label.to_string(),
        tool_version: xmaint_core::TOOL_VERSION.to_string(),
        config_hash: config.config_hash()?,
        metrics_summary: report::metrics_summary(&analysis, &assessment, &config),
        composite_total: None,
    })?;
    let text = match config.report.format {
        ReportFormat::Json => report::to_json(&json!({
            "snapshotId": saved.snapshot_id,
            "projectId": saved.project_id,
            "configHash": saved.config_hash,
            "timestampUtc": saved.timestamp_utc,
        })),
        _ => format!("{}\n", saved.snapshot_id),
    };
    emit(&text, opts.output.as_deref())?;
    Ok(status(!analysis.diagnostics.is_empty()))
}

fn rules_list(profile: &str, config: Option<&Path>, format: Option<ReportFormat>) -> Result<()> {
    let config = Config::resolve(config)?;
    config.validate()?;
    let registry = config.registry()?;
    let rule_set = config
        .rule_sets(&registry)?
        .remove(profile)
        .with_context(|| format!("unknown profile `{profile}`"))?;
    let rows: Vec<Value> = rule_set
        .rules
        .iter()
        .map(|r| {
            json!({
                "id": r.canonical_id,
                "enabled": r.enabled,
                "threshold": r.threshold,
                "baseThreshold": r.base_threshold,
                "pattern": r.pattern,
                "effortMinutes": report::minutes(r.effort_to_fix_minutes),
            })
        })
        .collect();
    print_rows(
        &rows,
        &[
            "id",
            "enabled",
            "threshold",
            "baseThreshold",
            "pattern",
            "effortMinutes",
        ],
        format.unwrap_or(config.report.format),
    )
}

fn profiles_list(config: Option<&Path>, format: Option<ReportFormat>) -> Result<()> {
    let config = Config::resolve(config)?;
    let registry = config.registry()?;
    let rows: Vec<Value> = registry
        .iter()
        .map(|p| {
            json!({
                "id": p.id(),
                "extensions": p.spec().file_extensions,
                "unitDetection": p.unit_detection(),
                "verbosityFactor": p.verbosity_factor(),
                "caseSensitive": p.case_sensitive(),
            })
        })
        .collect();
    print_rows(
        &rows,
        &[
            "id",
            "extensions",
            "unitDetection",
            "verbosityFactor",
            "caseSensitive",
        ],
        format.unwrap_or(config.report.format),
    )
}

fn plain(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(plain).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn print_rows(rows: &[Value], columns: &[&str], format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report::to_json(&Value::Array(rows.to_vec())),
        ReportFormat::Md => {
            let mut s = format!(
                "| {} |\n|{}\n",
                columns.join(" | "),
                "---|".repeat(columns.len())
            );
            for r in rows {
                let cells: Vec<String> = columns.iter().map(|c| plain(&r[*c])).collect();
                s.push_str(&format!("| {} |\n", cells.join(" | ")));
            }
            s
        }
        ReportFormat::Csv => {
            let mut s = columns.join(",") + "\n";
            for r in rows {
                let cells: Vec<String> = columns.iter().map(|c| plain(&r[*c])).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
    };
    emit(&text, None)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze {
            path,
            opts,
            project_id,
        } => analyze(&path, &opts, project_id),
        Command::Compare {
            paths,
            opts,
            sensitivity,
            delta_pp,
        } => compare(&paths, &opts, sensitivity, delta_pp),
        Command::Snapshot { action } => match action {
            SnapshotCmd::Save {
                path,
                store,
                label,
                project_id,
                opts,
            } => snapshot_save(&path, &store, &label, project_id, &opts),
            SnapshotCmd::List {
                path,
                store,
                project_id,
                format,
            } => {
                let id = project_id.or_else(|| path.as_deref().map(project_id_for));
                let list = SnapshotStore::open(&store).list(id.as_deref())?;
                emit(
                    &render_snapshot_list(&list, format.unwrap_or_default()),
                    None,
                )?;
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Trend {
            project_id,
            store,
            metric,
            force,
            format,
        } => {
            let series = SnapshotStore::open(&store).trend(&project_id, &metric, force)?;
            emit(&render_trend(&series, format.unwrap_or_default()), None)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Rules {
            action:
                RulesCmd::List {
                    profile,
                    config,
                    format,
                },
        } => rules_list(&profile, config.as_deref(), format).map(|_| ExitCode::SUCCESS),
        Command::Profiles {
            action: ProfilesCmd::List { config, format },
        } => profiles_list(config.as_deref(), format).map(|_| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
