use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no language profile matches {path}")]
    UnknownLanguage { path: PathBuf },

    #[error("unknown profile id `{0}`")]
    UnknownProfile(String),

    #[error("invalid profile definition `{id}`: {reason}")]
    InvalidProfile { id: String, reason: String },

    #[error("file extension `{extension}` claimed by both `{first}` and `{second}`")]
    DuplicateExtension {
        extension: String,
        first: String,
        second: String,
    },

    #[error("invalid rule configuration at `{key}`: {reason}")]
    InvalidRuleConfig { key: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no analyzable source files found")]
    EmptyProject,

    #[error("project has no units; averages are undefined")]
    MissingUnits,

    #[error("production effort is zero (project has no code lines)")]
    ZeroProductionEffort,

    #[error("technical debt ratio must be non-negative, got {0}")]
    NegativeTdr(f64),

    #[error("risk profile requires at least one unit with code lines")]
    NoUnits,

    #[error("volumetry needs at least two projects")]
    SingleProject,

    #[error("projects were estimated with different cost per line: {0}")]
    EstimatorMismatch(String),

    #[error("projects were assessed with different rule sets: {0}")]
    RuleSetMismatch(String),

    #[error("attribute counted twice: {}", format_pairs(.0))]
    SingleCountingViolation(Vec<(String, String)>),

    #[error("no snapshots stored for project `{0}`")]
    NoSnapshots(String),

    #[error("unknown metric key `{0}`")]
    UnknownMetricKey(String),

    #[error("snapshot store {path} is not writable: {reason}")]
    StoreUnwritable { path: PathBuf, reason: String },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(indicator, rule)| format!("indicator `{indicator}` and rule `{rule}`"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}

/// Problem found while lexing or segmenting one file; the caller attaches the path.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SourceIssue {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub message: String,
}

impl SourceIssue {
    pub fn into_diagnostic(self, file: impl Into<String>) -> Diagnostic {
        Diagnostic::new(file, Some(self.line), self.kind, self.message)
    }
}

/// Non-fatal problem attached to a file (or to the run as a whole).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub line: Option<usize>,
    pub kind: DiagnosticKind,
    pub message: String,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    UnterminatedString,
    UnterminatedComment,
    UnbalancedDelimiters,
    InvalidEncoding,
    Unreadable,
    EmptyIntersection,
}

impl Diagnostic {
    pub fn new(
        file: impl Into<String>,
        line: Option<usize>,
        kind: DiagnosticKind,
        message: impl Into<String>,
    ) -> Self {
        Self {
            file: file.into(),
            line,
            kind,
            message: message.into(),
        }
    }
}
