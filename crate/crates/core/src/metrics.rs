//! Base metrics: McCabe, Halstead, comment ratio, unit sizes and project means.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexer::{Token, TokenKind};
use crate::lines::{LineClassification, LineTotals};
use crate::profile::LanguageProfile;
use crate::units::Unit;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HalsteadCounts {
    /// Distinct operators.
    pub n1: usize,
    /// Distinct operands.
    pub n2: usize,
    /// Total operators.
    #[serde(rename = "N1")]
    pub total_operators: usize,
    /// Total operands.
    #[serde(rename = "N2")]
    pub total_operands: usize,
    pub vocabulary: usize,
    pub length: usize,
    pub volume: f64,
}

impl HalsteadCounts {
    fn from_counts(n1: usize, n2: usize, total_operators: usize, total_operands: usize) -> Self {
        let vocabulary = n1 + n2;
        let length = total_operators + total_operands;
        let volume = if vocabulary <= 1 {
            0.0
        } else {
            length as f64 * (vocabulary as f64).log2()
        };
        Self {
            n1,
            n2,
            total_operators,
            total_operands,
            vocabulary,
            length,
            volume,
        }
    }
}

/// `1 +` the number of decision tokens. Comment tokens are ignored.
pub fn cyclomatic_complexity<'a>(
    tokens: impl IntoIterator<Item = &'a Token>,
    profile: &LanguageProfile,
) -> usize {
    1 + tokens
        .into_iter()
        .filter(|t| !t.is_comment() && t.kind != TokenKind::StringLiteral)
        .filter(|t| profile.is_decision(&t.text))
        .count()
}

pub fn halstead<'a>(
    tokens: impl IntoIterator<Item = &'a Token>,
    profile: &LanguageProfile,
) -> HalsteadCounts {
    let mut operators = HashSet::new();
    let mut operands = HashSet::new();
    let (mut total_operators, mut total_operands) = (0, 0);
    for t in tokens {
        let key = (t.kind, profile.fold(&t.text).into_owned());
        let literal = matches!(t.kind, TokenKind::StringLiteral | TokenKind::NumberLiteral);
        if t.is_comment() {
            continue;
        }
        if !literal && profile.is_operator(&t.text) {
            total_operators += 1;
            operators.insert(key);
        } else if matches!(
            t.kind,
            TokenKind::Identifier | TokenKind::NumberLiteral | TokenKind::StringLiteral
        ) {
            total_operands += 1;
            operands.insert(key);
        }
    }
    HalsteadCounts::from_counts(
        operators.len(),
        operands.len(),
        total_operators,
        total_operands,
    )
}

/// `(comment + mixed) / (code + comment + mixed)`, 0 when nothing but blanks.
pub fn comment_ratio(lines: &LineTotals) -> f64 {
    let denominator = lines.code + lines.comment + lines.mixed;
    if denominator == 0 {
        0.0
    } else {
        (lines.comment + lines.mixed) as f64 / denominator as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitMetrics {
    pub unit: Unit,
    pub profile_id: String,
    pub loc: usize,
    pub cc: usize,
    pub param_count: usize,
    pub halstead: HalsteadCounts,
    pub nesting_depth_max: usize,
    pub verbosity_factor: f64,
}

impl UnitMetrics {
    /// Stable label `file:line:name` used in distributions and reports.
    pub fn label(&self) -> String {
        format!(
            "{}:{}:{}",
            self.unit.file, self.unit.start_line, self.unit.name
        )
    }
}

pub fn unit_metrics(
    unit: &Unit,
    file_tokens: &[Token],
    file_lines: &LineClassification,
    profile: &LanguageProfile,
) -> UnitMetrics {
    let loc = (unit.start_line..=unit.end_line)
        .filter(|&line| {
            !unit
                .nested_lines
                .iter()
                .any(|&(s, e)| s <= line && line <= e)
        })
        .filter(|&line| file_lines.is_loc(line))
        .count();
    let own: Vec<&Token> = unit.own_code_tokens(file_tokens).collect();
    UnitMetrics {
        unit: unit.clone(),
        profile_id: profile.id().to_string(),
        loc,
        cc: cyclomatic_complexity(own.iter().copied(), profile),
        param_count: unit.param_count,
        halstead: halstead(own.iter().copied(), profile),
        nesting_depth_max: unit.nesting_depth_max,
        verbosity_factor: profile.verbosity_factor(),
    }
}

/// Everything measured for one source file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileMetrics {
    pub path: String,
    pub profile_id: String,
    pub lines: LineTotals,
    pub code_tokens: usize,
    /// McCabe and Halstead over the whole file, for the file-level MI variant.
    pub cc: usize,
    pub halstead: HalsteadCounts,
    pub units: Vec<UnitMetrics>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    #[default]
    Unweighted,
    LocWeighted,
}

/// Granularity over which MI averages are taken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModuleGranularity {
    #[default]
    Unit,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectMetrics {
    pub file_count: usize,
    pub physical_lines: usize,
    pub lines: LineTotals,
    /// Code + mixed lines over the whole project.
    pub total_loc: usize,
    pub comment_ratio: f64,
    pub unit_count: usize,
    /// Mean Halstead volume per module; absent without modules.
    pub a_hv: Option<f64>,
    pub a_cc: Option<f64>,
    pub a_loc: Option<f64>,
    pub max_cc: Option<usize>,
    /// `(label, loc)` per unit, sorted by label.
    pub unit_size_distribution: Vec<(String, usize)>,
}

struct Sample {
    volume: f64,
    cc: f64,
    loc: f64,
}

fn mean(samples: &[Sample], averaging: Averaging, f: impl Fn(&Sample) -> f64) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    match averaging {
        Averaging::Unweighted => Some(samples.iter().map(&f).sum::<f64>() / samples.len() as f64),
        Averaging::LocWeighted => {
            let weight: f64 = samples.iter().map(|s| s.loc).sum();
            if weight == 0.0 {
                return Some(samples.iter().map(&f).sum::<f64>() / samples.len() as f64);
            }
            Some(samples.iter().map(|s| f(s) * s.loc).sum::<f64>() / weight)
        }
    }
}

/// Folds per-file metrics into project totals and module averages.
pub fn aggregate_project(
    files: &[FileMetrics],
    averaging: Averaging,
    granularity: ModuleGranularity,
) -> Result<ProjectMetrics> {
    if files.is_empty() {
        return Err(Error::EmptyProject);
    }
    let mut lines = LineTotals::default();
    for f in files {
        lines.add(&f.lines);
    }
    let units: Vec<&UnitMetrics> = files.iter().flat_map(|f| &f.units).collect();
    let samples: Vec<Sample> = match granularity {
        ModuleGranularity::Unit => units
            .iter()
            .map(|u| Sample {
                volume: u.halstead.volume,
                cc: u.cc as f64,
                loc: u.loc as f64,
            })
            .collect(),
        ModuleGranularity::File => files
            .iter()
            .filter(|f| f.lines.loc() > 0)
            .map(|f| Sample {
                volume: f.halstead.volume,
                cc: f.cc as f64,
                loc: f.lines.loc() as f64,
            })
            .collect(),
    };
    let mut unit_size_distribution: Vec<(String, usize)> =
        units.iter().map(|u| (u.label(), u.loc)).collect();
    unit_size_distribution.sort();
    Ok(ProjectMetrics {
        file_count: files.len(),
        physical_lines: lines.physical(),
        total_loc: lines.loc(),
        comment_ratio: comment_ratio(&lines),
        unit_count: units.len(),
        a_hv: mean(&samples, averaging, |s| s.volume),
        a_cc: mean(&samples, averaging, |s| s.cc),
        a_loc: mean(&samples, averaging, |s| s.loc),
        max_cc: units.iter().map(|u| u.cc).max(),
        unit_size_distribution,
        lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;
    use crate::lines::classify_lines;
    use crate::profile::ProfileRegistry;
    use crate::units::extract_units;

    fn profile(id: &str) -> LanguageProfile {
        ProfileRegistry::builtin().get(id).unwrap().clone()
    }

    fn unit_metrics_of(src: &str, id: &str) -> Vec<UnitMetrics> {
        let p = profile(id);
        let tokens = tokenize(src, &p).tokens;
        let lines = classify_lines(&tokens, crate::lexer::physical_lines(src));
        extract_units(&tokens, &p)
            .units
            .iter()
            .map(|u| unit_metrics(u, &tokens, &lines, &p))
            .collect()
    }

    #[test]
    fn straight_line_cc_is_one() {
        let p = profile("c-family");
        assert_eq!(cyclomatic_complexity(&tokenize("a = b;", &p).tokens, &p), 1);
        assert_eq!(cyclomatic_complexity(&[], &p), 1);
    }

    #[test]
    fn c_if_while_and() {
        let p = profile("c-family");
        let t = tokenize("if (a && b) { while (c) { x++; } } // if while", &p).tokens;
        assert_eq!(cyclomatic_complexity(&t, &p), 4);
    }

    #[test]
    fn python_if_elif_or() {
        let p = profile("python");
        let t = tokenize(
            "if a:\n    x = 1\nelif b or c:\n    x = 2\ns = 'if or'\n",
            &p,
        )
        .tokens;
        assert_eq!(cyclomatic_complexity(&t, &p), 4);
    }

    #[test]
    fn halstead_empty() {
        let h = halstead(&[], &profile("c-family"));
        assert_eq!(h, HalsteadCounts::default());
    }

    #[test]
    fn halstead_abc() {
        let p = profile("c-family");
        let h = halstead(&tokenize("a = b + c", &p).tokens, &p);
        assert_eq!(
            (h.n1, h.total_operators, h.n2, h.total_operands),
            (2, 2, 3, 3)
        );
        assert_eq!((h.vocabulary, h.length), (5, 5));
        assert!((h.volume - 11.609_640_474_436_812).abs() < 1e-9);
    }

    #[test]
    fn halstead_xxx() {
        let p = profile("c-family");
        let h = halstead(&tokenize("x = x + x", &p).tokens, &p);
        assert_eq!(
            (h.n1, h.total_operators, h.n2, h.total_operands),
            (2, 2, 1, 3)
        );
        assert!((h.volume - 7.924_812_503_605_781).abs() < 1e-9);
    }

    #[test]
    fn halstead_case_folding_only_for_case_insensitive_profiles() {
        let cobol = profile("cobol-like");
        let h = halstead(
            &tokenize("MOVE a TO A. move A to a.", &cobol).tokens,
            &cobol,
        );
        assert_eq!(h.n2, 1);
        assert_eq!(h.total_operands, 4);
        let c = profile("c-family");
        let h = halstead(&tokenize("a = A;", &c).tokens, &c);
        assert_eq!(h.n2, 2);
    }

    #[test]
    fn comment_ratio_cases() {
        assert_eq!(
            comment_ratio(&LineTotals {
                blank: 4,
                ..Default::default()
            }),
            0.0
        );
        let l = LineTotals {
            code: 6,
            comment: 2,
            mixed: 0,
            blank: 2,
        };
        assert_eq!(comment_ratio(&l), 0.25);
        let l = LineTotals {
            comment: 5,
            ..Default::default()
        };
        assert_eq!(comment_ratio(&l), 1.0);
    }

    #[test]
    fn one_line_unit() {
        let m = unit_metrics_of("int f(int a,int b){return a+b;}", "c-family");
        assert_eq!((m[0].loc, m[0].cc, m[0].param_count), (1, 1, 2));
    }

    #[test]
    fn twelve_line_python_unit_nesting() {
        let src = "\
def classify(values, limit):
    total = 0
    for v in values:
        total += v
    if total > limit:
        if limit > 0:
            return 'high'
        return 'neg'
    # fall through
    result = 'low'

    return result
";
        let m = unit_metrics_of(src, "python");
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].unit.end_line - m[0].unit.start_line + 1, 12);
        assert_eq!(m[0].nesting_depth_max, 2);
        assert_eq!(m[0].loc, 10);
        assert_eq!(m[0].cc, 4);
    }

    #[test]
    fn nested_unit_lines_are_excluded() {
        let src = "function outer(a) {\n  function inner(b) {\n    return b;\n  }\n  return inner(a);\n}\n";
        let m = unit_metrics_of(src, "c-family");
        assert_eq!(m[0].loc, 3);
        assert_eq!(m[1].loc, 3);
    }

    fn file(path: &str, units: &[(usize, usize, f64)], lines: LineTotals) -> FileMetrics {
        FileMetrics {
            path: path.into(),
            profile_id: "c-family".into(),
            lines,
            code_tokens: 0,
            cc: 1,
            halstead: HalsteadCounts::default(),
            units: units
                .iter()
                .enumerate()
                .map(|(i, &(cc, loc, volume))| UnitMetrics {
                    unit: Unit {
                        name: format!("u{i}"),
                        file: path.into(),
                        start_line: i + 1,
                        end_line: i + 1,
                        param_count: 0,
                        token_range: 0..1,
                        nesting_depth_max: 0,
                        nested: vec![],
                        nested_lines: vec![],
                    },
                    profile_id: "c-family".into(),
                    loc,
                    cc,
                    param_count: 0,
                    halstead: HalsteadCounts {
                        volume,
                        ..Default::default()
                    },
                    nesting_depth_max: 0,
                    verbosity_factor: 1.0,
                })
                .collect(),
        }
    }

    #[test]
    fn aggregate_means() {
        let lines = LineTotals {
            code: 40,
            ..Default::default()
        };
        let one = aggregate_project(
            &[file("a.c", &[(7, 10, 5.0)], lines)],
            Averaging::Unweighted,
            ModuleGranularity::Unit,
        )
        .unwrap();
        assert_eq!(one.a_cc, Some(7.0));
        let two = aggregate_project(
            &[file("a.c", &[(1, 10, 5.0), (3, 30, 9.0)], lines)],
            Averaging::Unweighted,
            ModuleGranularity::Unit,
        )
        .unwrap();
        assert_eq!(
            (two.a_cc, two.a_loc, two.a_hv),
            (Some(2.0), Some(20.0), Some(7.0))
        );
        assert_eq!(two.max_cc, Some(3));
        let weighted = aggregate_project(
            &[file("a.c", &[(1, 10, 5.0), (3, 30, 9.0)], lines)],
            Averaging::LocWeighted,
            ModuleGranularity::Unit,
        )
        .unwrap();
        assert_eq!(weighted.a_cc, Some(2.5));
    }

    #[test]
    fn aggregate_without_units_is_absent_not_zero() {
        let lines = LineTotals {
            code: 12,
            comment: 3,
            ..Default::default()
        };
        let p = aggregate_project(
            &[file("a.c", &[], lines)],
            Averaging::Unweighted,
            ModuleGranularity::Unit,
        )
        .unwrap();
        assert_eq!(p.total_loc, 12);
        assert_eq!(
            (p.a_hv, p.a_cc, p.a_loc, p.max_cc),
            (None, None, None, None)
        );
        assert!((p.comment_ratio - 0.2).abs() < 1e-12);
    }

    #[test]
    fn aggregate_requires_files() {
        assert!(matches!(
            aggregate_project(&[], Averaging::Unweighted, ModuleGranularity::Unit),
            Err(Error::EmptyProject)
        ));
    }
}
