//! Append-only store of analysis summaries, for tracking a project over time.
//!
//! Layout: `<store>/<projectId>/<snapshotId>.json` plus a rebuildable
//! `<store>/index.json`. Writers serialize through `<store>/.lock`.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::{Error, Result};

const LOCK_FILE: &str = ".lock";
const INDEX_FILE: &str = "index.json";
const LOCK_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Snapshot {
    pub snapshot_id: String,
    pub project_id: String,
    pub label: String,
    /// ISO-8601, UTC, millisecond precision.
    pub timestamp_utc: String,
    pub tool_version: String,
    pub config_hash: String,
    pub metrics_summary: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite_total: Option<f64>,
}

/// Everything a snapshot holds except its id and timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct NewSnapshot {
    pub project_id: String,
    pub label: String,
    pub tool_version: String,
    pub config_hash: String,
    pub metrics_summary: BTreeMap<String, Value>,
    pub composite_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexEntry {
    pub project_id: String,
    pub snapshot_id: String,
    pub timestamp_utc: String,
    pub label: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrendPoint {
    pub snapshot_id: String,
    pub timestamp_utc: String,
    pub label: String,
    pub value: Value,
    pub config_hash: String,
    /// Measured under a different configuration than the latest point.
    pub incomparable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrendSeries {
    pub project_id: String,
    pub metric: String,
    pub latest_config_hash: String,
    pub points: Vec<TrendPoint>,
}

struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn unwritable(path: &Path, reason: impl ToString) -> Error {
    Error::StoreUnwritable {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

fn valid_project_id(id: &str) -> bool {
    !id.is_empty() && id != "." && id != ".." && !id.starts_with('.') && !id.contains(['/', '\\'])
}

#[derive(Debug, Clone)]
pub struct SnapshotStore {
    root: PathBuf,
}

impl SnapshotStore {
    /// Opens the store for reading; nothing is created.
    pub fn open(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock(&self) -> Result<LockGuard> {
        fs::create_dir_all(&self.root).map_err(|e| unwritable(&self.root, e))?;
        let path = self.root.join(LOCK_FILE);
        let started = Instant::now();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(_) => return Ok(LockGuard(path)),
                Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                    if started.elapsed() > LOCK_TIMEOUT {
                        return Err(unwritable(
                            &self.root,
                            format!("locked by {}", path.display()),
                        ));
                    }
                    std::thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(unwritable(&self.root, e)),
            }
        }
    }

    pub fn save(&self, snapshot: NewSnapshot) -> Result<Snapshot> {
        self.save_at(snapshot, Utc::now())
    }

    /// Writes a new snapshot stamped with `at`. Existing files are never replaced.
    pub fn save_at(&self, new: NewSnapshot, at: DateTime<Utc>) -> Result<Snapshot> {
        if !valid_project_id(&new.project_id) {
            return Err(Error::InvalidConfig(format!(
                "project id `{}` cannot be used as a store directory name",
                new.project_id
            )));
        }
        let _guard = self.lock()?;
        let dir = self.root.join(&new.project_id);
        fs::create_dir_all(&dir).map_err(|e| unwritable(&dir, e))?;
        let mut snapshot = Snapshot {
            snapshot_id: String::new(),
            project_id: new.project_id,
            label: new.label,
            timestamp_utc: at.to_rfc3339_opts(SecondsFormat::Millis, true),
            tool_version: new.tool_version,
            config_hash: new.config_hash,
            metrics_summary: new.metrics_summary,
            composite_total: new.composite_total,
        };
        let body = serde_json::to_string(&snapshot).map_err(|e| Error::json("snapshot", e))?;
        let digest = hex(&Sha256::digest(body.as_bytes()));
        let base = format!("{}-{}", at.format("%Y%m%dT%H%M%S%3fZ"), &digest[..12]);
        for attempt in 1.. {
            let id = if attempt == 1 {
                base.clone()
            } else {
                format!("{base}-{attempt}")
            };
            let path = dir.join(format!("{id}.json"));
            let mut file = match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(f) => f,
                Err(e) if e.kind() == ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(unwritable(&path, e)),
            };
            snapshot.snapshot_id = id;
            let mut text = serde_json::to_string_pretty(
                &serde_json::to_value(&snapshot).map_err(|e| Error::json("snapshot", e))?,
            )
            .map_err(|e| Error::json("snapshot", e))?;
            text.push('\n');
            file.write_all(text.as_bytes())
                .map_err(|e| unwritable(&path, e))?;
            break;
        }
        self.write_index()?;
        Ok(snapshot)
    }

    /// All snapshots, optionally of one project, ordered by (project, timestamp, id).
    pub fn list(&self, project_id: Option<&str>) -> Result<Vec<Snapshot>> {
        let mut out = Vec::new();
        let projects: Vec<PathBuf> = match project_id {
            Some(id) => vec![self.root.join(id)],
            None => match fs::read_dir(&self.root) {
                Ok(entries) => entries
                    .filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|p| p.is_dir())
                    .collect(),
                Err(e) if e.kind() == ErrorKind::NotFound => Vec::new(),
                Err(e) => return Err(Error::io(&self.root, e)),
            },
        };
        for dir in projects {
            let entries = match fs::read_dir(&dir) {
                Ok(entries) => entries,
                Err(e) if e.kind() == ErrorKind::NotFound => continue,
                Err(e) => return Err(Error::io(&dir, e)),
            };
            for entry in entries {
                let path = entry.map_err(|e| Error::io(&dir, e))?.path();
                if path.extension().and_then(|e| e.to_str()) != Some("json") {
                    continue;
                }
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let snapshot: Snapshot = serde_json::from_str(&text)
                    .map_err(|e| Error::json(path.display().to_string(), e))?;
                out.push(snapshot);
            }
        }
        out.sort_by(|a, b| {
            (&a.project_id, &a.timestamp_utc, &a.snapshot_id).cmp(&(
                &b.project_id,
                &b.timestamp_utc,
                &b.snapshot_id,
            ))
        });
        Ok(out)
    }

    /// Regenerates `index.json` from the snapshot files.
    pub fn write_index(&self) -> Result<Vec<IndexEntry>> {
        let index: Vec<IndexEntry> = self
            .list(None)?
            .into_iter()
            .map(|s| IndexEntry {
                project_id: s.project_id,
                snapshot_id: s.snapshot_id,
                timestamp_utc: s.timestamp_utc,
                label: s.label,
                config_hash: s.config_hash,
            })
            .collect();
        let path = self.root.join(INDEX_FILE);
        let tmp = self.root.join(format!("{INDEX_FILE}.tmp"));
        let mut text = serde_json::to_string_pretty(&index).map_err(|e| Error::json("index", e))?;
        text.push('\n');
        fs::write(&tmp, text).map_err(|e| unwritable(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| unwritable(&path, e))?;
        Ok(index)
    }

    /// Series of `metric` for `project_id`, oldest first. Points taken under a
    /// configuration other than the latest one are flagged unless `force`.
    pub fn trend(&self, project_id: &str, metric: &str, force: bool) -> Result<TrendSeries> {
        let snapshots = self.list(Some(project_id))?;
        let Some(latest) = snapshots.last() else {
            return Err(Error::NoSnapshots(project_id.to_string()));
        };
        if !snapshots
            .iter()
            .any(|s| s.metrics_summary.contains_key(metric))
        {
            return Err(Error::UnknownMetricKey(metric.to_string()));
        }
        let latest_hash = latest.config_hash.clone();
        let points = snapshots
            .iter()
            .map(|s| TrendPoint {
                snapshot_id: s.snapshot_id.clone(),
                timestamp_utc: s.timestamp_utc.clone(),
                label: s.label.clone(),
                value: s
                    .metrics_summary
                    .get(metric)
                    .cloned()
                    .unwrap_or(Value::Null),
                config_hash: s.config_hash.clone(),
                incomparable: !force && s.config_hash != latest_hash,
            })
            .collect();
        Ok(TrendSeries {
            project_id: project_id.to_string(),
            metric: metric.to_string(),
            latest_config_hash: latest_hash,
            points,
        })
    }
}
