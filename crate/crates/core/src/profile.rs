//! Language profiles: the lexical description of a language.
//!
//! A profile is plain data (see `profiles/*.json` in this crate for the shipped
//! ones). Adding a language means writing a JSON document with the same shape
//! as [`ProfileSpec`]; no code changes are needed.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN_PROFILES: [(&str, &str); 3] = [
    ("c-family", include_str!("../profiles/c-family.json")),
    ("python", include_str!("../profiles/python.json")),
    ("cobol-like", include_str!("../profiles/cobol-like.json")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitDetection {
    BraceBlock,
    IndentBlock,
    KeywordPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StringDelimiter {
    pub open: String,
    pub close: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escape: Option<char>,
    /// Whether the literal may span lines. An unterminated single-line literal
    /// ends at the end of its line; a multi-line one runs to end of file.
    #[serde(default)]
    pub multiline: bool,
}

/// Character classes written as in a regex bracket expression without the
/// brackets, e.g. `A-Za-z_`. Non-ASCII alphabetic characters are always
/// accepted as identifier characters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifierPattern {
    pub start: String,
    #[serde(rename = "continue")]
    pub continue_: String,
}

/// On-disk shape of a language profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub id: String,
    pub file_extensions: Vec<String>,
    #[serde(default)]
    pub line_comment_markers: Vec<String>,
    #[serde(default)]
    pub block_comment_delimiters: Vec<(String, String)>,
    #[serde(default)]
    pub string_delimiters: Vec<StringDelimiter>,
    /// Identifier prefixes glued to a following string literal (`r"..."`).
    #[serde(default)]
    pub string_prefixes: Vec<String>,
    #[serde(default)]
    pub keywords: Vec<String>,
    pub decision_tokens: Vec<String>,
    pub operator_tokens: Vec<String>,
    #[serde(default)]
    pub punctuation: Vec<String>,
    pub unit_detection: UnitDetection,
    #[serde(default)]
    pub unit_keywords: Vec<String>,
    /// Keywords closing a unit (keyword-pair detection only).
    #[serde(default)]
    pub unit_close_keywords: Vec<String>,
    /// Open/close keyword pairs that form nested blocks (keyword-pair detection only).
    #[serde(default)]
    pub nesting_pairs: Vec<(String, String)>,
    pub identifier_pattern: IdentifierPattern,
    #[serde(default = "default_true")]
    pub case_sensitive: bool,
    #[serde(default = "default_verbosity")]
    pub verbosity_factor: f64,
    /// Default pattern for the naming-convention rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naming_pattern: Option<String>,
}

fn default_true() -> bool {
    true
}

fn default_verbosity() -> f64 {
    1.0
}

#[derive(Debug, Clone)]
struct CharClass {
    ranges: Vec<(char, char)>,
}

impl CharClass {
    fn parse(spec: &str) -> Self {
        let chars: Vec<char> = spec.chars().collect();
        let mut ranges = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            if i + 2 < chars.len() && chars[i + 1] == '-' {
                ranges.push((chars[i], chars[i + 2]));
                i += 3;
            } else {
                ranges.push((chars[i], chars[i]));
                i += 1;
            }
        }
        Self { ranges }
    }

    fn contains(&self, c: char) -> bool {
        (!c.is_ascii() && c.is_alphabetic())
            || self.ranges.iter().any(|&(lo, hi)| lo <= c && c <= hi)
    }
}

/// A validated profile with its lookup tables built.
#[derive(Debug, Clone)]
pub struct LanguageProfile {
    spec: ProfileSpec,
    keywords: HashSet<String>,
    decisions: HashSet<String>,
    operators: HashSet<String>,
    punctuation: HashSet<String>,
    unit_keywords: HashSet<String>,
    unit_close_keywords: HashSet<String>,
    string_prefixes: HashSet<String>,
    /// Symbolic tokens, longest first, for maximal-munch lexing.
    symbols: Vec<String>,
    ident_start: CharClass,
    ident_continue: CharClass,
}

impl LanguageProfile {
    pub fn from_spec(spec: ProfileSpec) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidProfile {
            id: spec.id.clone(),
            reason: reason.to_string(),
        };
        if spec.id.trim().is_empty() {
            return Err(invalid("empty id"));
        }
        if !(spec.verbosity_factor > 0.0 && spec.verbosity_factor.is_finite()) {
            return Err(invalid("verbosity_factor must be a positive number"));
        }
        if spec.file_extensions.is_empty() {
            return Err(invalid("no file extensions"));
        }
        if spec.identifier_pattern.start.is_empty() {
            return Err(invalid("identifier_pattern.start is empty"));
        }
        if spec.unit_detection == UnitDetection::KeywordPair && spec.unit_close_keywords.is_empty()
        {
            return Err(invalid("keyword-pair detection needs unit_close_keywords"));
        }
        for (open, close) in &spec.block_comment_delimiters {
            if open.is_empty() || close.is_empty() {
                return Err(invalid("empty block comment delimiter"));
            }
        }
        for d in &spec.string_delimiters {
            if d.open.is_empty() || d.close.is_empty() {
                return Err(invalid("empty string delimiter"));
            }
        }
        if spec.line_comment_markers.iter().any(String::is_empty) {
            return Err(invalid("empty line comment marker"));
        }
        if let Some(pattern) = &spec.naming_pattern {
            regex::Regex::new(pattern).map_err(|e| invalid(&format!("naming_pattern: {e}")))?;
        }

        let cs = spec.case_sensitive;
        let fold_set = |items: &[String]| -> HashSet<String> {
            items
                .iter()
                .map(|s| fold_case(s, cs).into_owned())
                .collect()
        };
        let ident_start = CharClass::parse(&spec.identifier_pattern.start);
        let ident_continue = CharClass::parse(&spec.identifier_pattern.continue_);

        let mut symbols: Vec<String> = spec
            .operator_tokens
            .iter()
            .chain(&spec.punctuation)
            .chain(&spec.decision_tokens)
            .filter(|t| {
                t.chars()
                    .next()
                    .is_some_and(|c| !ident_start.contains(c) && !c.is_ascii_digit())
            })
            .cloned()
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        symbols.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

        Ok(Self {
            keywords: fold_set(&spec.keywords),
            decisions: fold_set(&spec.decision_tokens),
            operators: fold_set(&spec.operator_tokens),
            punctuation: spec.punctuation.iter().cloned().collect(),
            unit_keywords: fold_set(&spec.unit_keywords),
            unit_close_keywords: fold_set(&spec.unit_close_keywords),
            string_prefixes: spec
                .string_prefixes
                .iter()
                .map(|p| p.to_lowercase())
                .collect(),
            symbols,
            ident_start,
            ident_continue,
            spec,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProfileSpec =
            serde_json::from_str(text).map_err(|e| Error::json("profile definition", e))?;
        Self::from_spec(spec)
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn id(&self) -> &str {
        &self.spec.id
    }

    pub fn unit_detection(&self) -> UnitDetection {
        self.spec.unit_detection
    }

    pub fn case_sensitive(&self) -> bool {
        self.spec.case_sensitive
    }

    pub fn verbosity_factor(&self) -> f64 {
        self.spec.verbosity_factor
    }

    pub fn naming_pattern(&self) -> Option<&str> {
        self.spec.naming_pattern.as_deref()
    }

    /// Case-folds `text` when the language is case-insensitive.
    pub fn fold<'a>(&self, text: &'a str) -> std::borrow::Cow<'a, str> {
        fold_case(text, self.spec.case_sensitive)
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.keywords.contains(self.fold(word).as_ref())
    }

    pub fn is_decision(&self, text: &str) -> bool {
        self.decisions.contains(self.fold(text).as_ref())
    }

    pub fn is_operator(&self, text: &str) -> bool {
        self.operators.contains(self.fold(text).as_ref())
    }

    pub fn is_punctuation(&self, text: &str) -> bool {
        self.punctuation.contains(text)
    }

    pub fn is_unit_keyword(&self, text: &str) -> bool {
        self.unit_keywords.contains(self.fold(text).as_ref())
    }

    pub fn is_unit_close_keyword(&self, text: &str) -> bool {
        self.unit_close_keywords.contains(self.fold(text).as_ref())
    }

    pub(crate) fn is_string_prefix(&self, word: &str) -> bool {
        self.string_prefixes.contains(&word.to_lowercase())
    }

    pub(crate) fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub(crate) fn is_ident_start(&self, c: char) -> bool {
        self.ident_start.contains(c)
    }

    pub(crate) fn is_ident_continue(&self, c: char) -> bool {
        self.ident_continue.contains(c) || self.ident_start.contains(c)
    }

    /// Index of the nesting pair opened by `text`, if any.
    pub(crate) fn nesting_open(&self, text: &str) -> Option<usize> {
        let folded = self.fold(text);
        self.spec
            .nesting_pairs
            .iter()
            .position(|(open, _)| self.fold(open) == folded)
    }

    pub(crate) fn nesting_close(&self, text: &str) -> Option<usize> {
        let folded = self.fold(text);
        self.spec
            .nesting_pairs
            .iter()
            .position(|(_, close)| self.fold(close) == folded)
    }
}

fn fold_case(text: &str, case_sensitive: bool) -> std::borrow::Cow<'_, str> {
    if case_sensitive {
        std::borrow::Cow::Borrowed(text)
    } else {
        std::borrow::Cow::Owned(text.to_uppercase())
    }
}

/// The set of known profiles, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct ProfileRegistry {
    profiles: BTreeMap<String, LanguageProfile>,
}

impl ProfileRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding the shipped `c-family`, `python` and `cobol-like` profiles.
    pub fn builtin() -> Self {
        let mut registry = Self::default();
        for (name, text) in BUILTIN_PROFILES {
            let profile = LanguageProfile::from_json(text)
                .unwrap_or_else(|e| panic!("shipped profile {name} is invalid: {e}"));
            registry
                .insert(profile)
                .unwrap_or_else(|e| panic!("shipped profile {name}: {e}"));
        }
        registry
    }

    /// Adds a profile, replacing any profile with the same id.
    pub fn insert(&mut self, profile: LanguageProfile) -> Result<()> {
        for ext in &profile.spec.file_extensions {
            let ext = normalize_extension(ext);
            if let Some(other) = self.profiles.values().find(|p| {
                p.id() != profile.id()
                    && p.spec
                        .file_extensions
                        .iter()
                        .any(|e| normalize_extension(e) == ext)
            }) {
                return Err(Error::DuplicateExtension {
                    extension: ext,
                    first: other.id().to_string(),
                    second: profile.id().to_string(),
                });
            }
        }
        let mut seen = HashSet::new();
        for ext in &profile.spec.file_extensions {
            if !seen.insert(normalize_extension(ext)) {
                return Err(Error::InvalidProfile {
                    id: profile.id().to_string(),
                    reason: format!("extension `{ext}` listed twice"),
                });
            }
        }
        self.profiles.insert(profile.id().to_string(), profile);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&LanguageProfile> {
        self.profiles
            .get(id)
            .ok_or_else(|| Error::UnknownProfile(id.to_string()))
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LanguageProfile> {
        self.profiles.values()
    }

    /// Picks the profile claiming the extension of `path`.
    pub fn detect(&self, path: &Path) -> Result<&LanguageProfile> {
        let unknown = || Error::UnknownLanguage {
            path: path.to_path_buf(),
        };
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(normalize_extension)
            .ok_or_else(unknown)?;
        self.profiles
            .values()
            .find(|p| {
                p.spec
                    .file_extensions
                    .iter()
                    .any(|e| normalize_extension(e) == ext)
            })
            .ok_or_else(unknown)
    }
}

fn normalize_extension(ext: &str) -> String {
    ext.trim_start_matches('.').to_ascii_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_profiles_are_valid_and_distinct() {
        let registry = ProfileRegistry::builtin();
        let ids: Vec<_> = registry.iter().map(|p| p.id().to_string()).collect();
        assert_eq!(ids, ["c-family", "cobol-like", "python"]);
        for p in registry.iter() {
            assert!(!p.spec().decision_tokens.is_empty());
            assert!(!p.spec().operator_tokens.is_empty());
            assert!(p.verbosity_factor() > 0.0);
        }
    }

    #[test]
    fn detect_by_extension() {
        let registry = ProfileRegistry::builtin();
        assert_eq!(registry.detect(Path::new("a.py")).unwrap().id(), "python");
        assert_eq!(registry.detect(Path::new("x.h")).unwrap().id(), "c-family");
        assert_eq!(
            registry.detect(Path::new("LEGACY.CBL")).unwrap().id(),
            "cobol-like"
        );
        assert!(matches!(
            registry.detect(Path::new("src/main.foo")),
            Err(Error::UnknownLanguage { .. })
        ));
        assert!(matches!(
            registry.detect(Path::new("Makefile")),
            Err(Error::UnknownLanguage { .. })
        ));
    }

    #[test]
    fn python_only_registry() {
        let mut registry = ProfileRegistry::empty();
        let python = ProfileRegistry::builtin().get("python").unwrap().clone();
        registry.insert(python).unwrap();
        assert_eq!(registry.detect(Path::new("a.py")).unwrap().id(), "python");
        assert!(registry.detect(Path::new("a.c")).is_err());
    }

    #[test]
    fn extension_clash_is_rejected() {
        let mut registry = ProfileRegistry::builtin();
        let mut spec = registry.get("python").unwrap().spec().clone();
        spec.id = "other".into();
        spec.file_extensions = vec!["PY".into()];
        let err = registry
            .insert(LanguageProfile::from_spec(spec).unwrap())
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateExtension { .. }));
    }

    #[test]
    fn override_by_id_replaces() {
        let mut registry = ProfileRegistry::builtin();
        let mut spec = registry.get("python").unwrap().spec().clone();
        spec.verbosity_factor = 0.5;
        registry
            .insert(LanguageProfile::from_spec(spec).unwrap())
            .unwrap();
        assert_eq!(registry.get("python").unwrap().verbosity_factor(), 0.5);
    }

    #[test]
    fn rejects_bad_verbosity() {
        let mut spec = ProfileRegistry::builtin()
            .get("c-family")
            .unwrap()
            .spec()
            .clone();
        spec.verbosity_factor = 0.0;
        assert!(matches!(
            LanguageProfile::from_spec(spec),
            Err(Error::InvalidProfile { .. })
        ));
    }

    #[test]
    fn case_insensitive_lookup() {
        let registry = ProfileRegistry::builtin();
        let cobol = registry.get("cobol-like").unwrap();
        assert!(cobol.is_decision("if"));
        assert!(cobol.is_keyword("Perform"));
        let c = registry.get("c-family").unwrap();
        assert!(c.is_decision("if"));
        assert!(!c.is_decision("IF"));
    }
}
