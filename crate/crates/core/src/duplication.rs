//! Token-based clone detection.
//!
//! Candidate windows of `min_tokens` normalized tokens are bucketed by a
//! polynomial rolling hash; every candidate pair is verified token by token, so
//! hash collisions never produce false clones. A clone is reported once, at the
//! left end of its maximal run.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::lexer::{Token, TokenKind};

pub const DEFAULT_MIN_TOKENS: usize = 50;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    #[default]
    Exact,
    IdentifierBlind,
}

impl std::str::FromStr for NormalizationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "identifier-blind" => Ok(Self::IdentifierBlind),
            other => Err(format!(
                "unknown duplication mode `{other}` (expected exact or identifier-blind)"
            )),
        }
    }
}

const IDENTIFIER_PLACEHOLDER: &str = "$id";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormToken {
    pub kind: TokenKind,
    pub text: String,
    /// Index of the source token this was derived from.
    pub source_index: usize,
    pub line: usize,
    pub end_line: usize,
}

/// Drops comments; in identifier-blind mode every identifier becomes one placeholder.
pub fn normalize_tokens(tokens: &[Token], mode: NormalizationMode) -> Vec<NormToken> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.is_comment())
        .map(|(i, t)| NormToken {
            kind: t.kind,
            text: if mode == NormalizationMode::IdentifierBlind && t.kind == TokenKind::Identifier {
                IDENTIFIER_PLACEHOLDER.to_string()
            } else {
                t.text.clone()
            },
            source_index: i,
            line: t.line,
            end_line: t.end_line(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub file: String,
    /// Index into the file's normalized token sequence.
    pub start_token: usize,
    pub start_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloneBlock {
    pub a: Occurrence,
    pub b: Occurrence,
    pub length_tokens: usize,
    pub length_lines_a: usize,
    pub length_lines_b: usize,
}

/// A clone expressed in stream coordinates: `(file, start)` pairs with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RawClone {
    pub file_a: usize,
    pub start_a: usize,
    pub file_b: usize,
    pub start_b: usize,
    pub len: usize,
}

const HASH_BASE: u64 = 0x0000_0100_0000_01b3;

/// Finds every maximal repeated run of at least `min_tokens` symbols, within
/// and across streams. Runs whose two occurrences overlap in one stream are
/// cut into adjacent non-overlapping pieces, left to right.
pub fn find_clone_runs(streams: &[Vec<u32>], min_tokens: usize) -> Vec<RawClone> {
    let min_tokens = min_tokens.max(1);
    let mut power = 1u64;
    for _ in 1..min_tokens {
        power = power.wrapping_mul(HASH_BASE);
    }
    let mut buckets: HashMap<u64, Vec<(usize, usize)>> = HashMap::new();
    for (f, s) in streams.iter().enumerate() {
        if s.len() < min_tokens {
            continue;
        }
        let mut h = 0u64;
        for &sym in &s[..min_tokens] {
            h = h.wrapping_mul(HASH_BASE).wrapping_add(u64::from(sym) + 1);
        }
        buckets.entry(h).or_default().push((f, 0));
        for pos in 1..=s.len() - min_tokens {
            h = h
                .wrapping_sub((u64::from(s[pos - 1]) + 1).wrapping_mul(power))
                .wrapping_mul(HASH_BASE)
                .wrapping_add(u64::from(s[pos + min_tokens - 1]) + 1);
            buckets.entry(h).or_default().push((f, pos));
        }
    }

    let mut out = Vec::new();
    for bucket in buckets.values().filter(|b| b.len() > 1) {
        for (i, &(fa, pa)) in bucket.iter().enumerate() {
            let sa = &streams[fa];
            for &(fb, pb) in &bucket[i + 1..] {
                let sb = &streams[fb];
                if sa[pa..pa + min_tokens] != sb[pb..pb + min_tokens] {
                    continue;
                }
                if pa > 0 && pb > 0 && sa[pa - 1] == sb[pb - 1] {
                    continue;
                }
                let mut len = min_tokens;
                while pa + len < sa.len() && pb + len < sb.len() && sa[pa + len] == sb[pb + len] {
                    len += 1;
                }
                push_split(&mut out, fa, pa, fb, pb, len, min_tokens);
            }
        }
    }
    out.sort();
    out
}

/// Records a maximal run, splitting it when both occurrences sit in one
/// stream and overlap.
pub(crate) fn push_split(
    out: &mut Vec<RawClone>,
    file_a: usize,
    start_a: usize,
    file_b: usize,
    start_b: usize,
    len: usize,
    min_tokens: usize,
) {
    if file_a != file_b || start_a + len <= start_b {
        if len >= min_tokens {
            out.push(RawClone {
                file_a,
                start_a,
                file_b,
                start_b,
                len,
            });
        }
        return;
    }
    let shift = start_b - start_a;
    let mut offset = 0;
    while offset < len {
        let piece = shift.min(len - offset);
        if piece >= min_tokens {
            out.push(RawClone {
                file_a,
                start_a: start_a + offset,
                file_b,
                start_b: start_b + offset,
                len: piece,
            });
        }
        offset += shift;
    }
}

/// Normalized tokens of one file, ready for clone detection.
#[derive(Debug, Clone)]
pub struct FileTokens {
    pub path: String,
    pub tokens: Vec<NormToken>,
    /// Code + mixed lines of the file.
    pub loc_lines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicationReport {
    pub blocks: Vec<CloneBlock>,
    pub duplicated_token_ratio: f64,
    pub duplicated_line_ratio: f64,
    pub duplicated_tokens: usize,
    pub total_tokens: usize,
    pub duplicated_lines: usize,
    pub total_lines: usize,
    pub min_tokens: usize,
    pub normalization_mode: NormalizationMode,
}

fn intern(files: &[FileTokens]) -> Vec<Vec<u32>> {
    let mut ids: HashMap<(TokenKind, &str), u32> = HashMap::new();
    files
        .iter()
        .map(|f| {
            f.tokens
                .iter()
                .map(|t| {
                    let next = ids.len() as u32;
                    *ids.entry((t.kind, t.text.as_str())).or_insert(next)
                })
                .collect()
        })
        .collect()
}

fn lines_spanned(tokens: &[NormToken]) -> usize {
    match (tokens.first(), tokens.last()) {
        (Some(first), Some(last)) => last.end_line - first.line + 1,
        _ => 0,
    }
}

/// Clone blocks across `files`, sorted by `(fileA, startA, fileB, startB)`.
pub fn find_clone_blocks(files: &[FileTokens], min_tokens: usize) -> Vec<CloneBlock> {
    let streams = intern(files);
    let mut blocks: Vec<CloneBlock> = find_clone_runs(&streams, min_tokens)
        .into_iter()
        .map(|raw| {
            let (fa, fb) = (&files[raw.file_a], &files[raw.file_b]);
            let span_a = &fa.tokens[raw.start_a..raw.start_a + raw.len];
            let span_b = &fb.tokens[raw.start_b..raw.start_b + raw.len];
            CloneBlock {
                a: Occurrence {
                    file: fa.path.clone(),
                    start_token: raw.start_a,
                    start_line: span_a[0].line,
                },
                b: Occurrence {
                    file: fb.path.clone(),
                    start_token: raw.start_b,
                    start_line: span_b[0].line,
                },
                length_tokens: raw.len,
                length_lines_a: lines_spanned(span_a),
                length_lines_b: lines_spanned(span_b),
            }
        })
        .map(canonical)
        .collect();
    blocks.sort_by(|x, y| {
        (
            &x.a.file,
            x.a.start_token,
            &x.b.file,
            x.b.start_token,
            x.length_tokens,
        )
            .cmp(&(
                &y.a.file,
                y.a.start_token,
                &y.b.file,
                y.b.start_token,
                y.length_tokens,
            ))
    });
    blocks
}

/// Orders the two occurrences so that `a` precedes `b`.
pub fn canonical(mut block: CloneBlock) -> CloneBlock {
    if (&block.b.file, block.b.start_token) < (&block.a.file, block.a.start_token) {
        std::mem::swap(&mut block.a, &mut block.b);
        std::mem::swap(&mut block.length_lines_a, &mut block.length_lines_b);
    }
    block
}

/// Fraction of token positions and of code lines covered by at least one block.
pub fn duplication_ratios(blocks: &[CloneBlock], files: &[FileTokens]) -> (Coverage, Coverage) {
    let index: HashMap<&str, usize> = files
        .iter()
        .enumerate()
        .map(|(i, f)| (f.path.as_str(), i))
        .collect();
    let mut covered: Vec<Vec<bool>> = files.iter().map(|f| vec![false; f.tokens.len()]).collect();
    for block in blocks {
        for occ in [&block.a, &block.b] {
            if let Some(&f) = index.get(occ.file.as_str()) {
                let end = (occ.start_token + block.length_tokens).min(covered[f].len());
                for flag in &mut covered[f][occ.start_token..end] {
                    *flag = true;
                }
            }
        }
    }
    let mut tokens = Coverage::default();
    let mut lines = Coverage::default();
    for (file, flags) in files.iter().zip(&covered) {
        tokens.total += file.tokens.len();
        tokens.covered += flags.iter().filter(|&&c| c).count();
        lines.total += file.loc_lines;
        let mut dup_lines = std::collections::BTreeSet::new();
        for (t, _) in file.tokens.iter().zip(flags).filter(|(_, &c)| c) {
            dup_lines.extend(t.line..=t.end_line);
        }
        lines.covered += dup_lines.len();
    }
    (tokens, lines)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Coverage {
    pub covered: usize,
    pub total: usize,
}

impl Coverage {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.covered as f64 / self.total as f64
        }
    }
}

/// Full duplication analysis over a project's files.
pub fn analyze_duplication(
    files: &[FileTokens],
    min_tokens: usize,
    mode: NormalizationMode,
) -> DuplicationReport {
    let blocks = find_clone_blocks(files, min_tokens);
    let (tokens, lines) = duplication_ratios(&blocks, files);
    DuplicationReport {
        duplicated_token_ratio: tokens.ratio(),
        duplicated_line_ratio: lines.ratio(),
        duplicated_tokens: tokens.covered,
        total_tokens: tokens.total,
        duplicated_lines: lines.covered,
        total_lines: lines.total,
        blocks,
        min_tokens,
        normalization_mode: mode,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;
    use crate::profile::ProfileRegistry;

    fn norm(src: &str, mode: NormalizationMode) -> Vec<(TokenKind, String)> {
        let registry = ProfileRegistry::builtin();
        normalize_tokens(
            &tokenize(src, registry.get("c-family").unwrap()).tokens,
            mode,
        )
        .into_iter()
        .map(|t| (t.kind, t.text))
        .collect()
    }

    #[test]
    fn comment_only_normalizes_to_nothing() {
        assert!(norm("// a\n/* b */", NormalizationMode::Exact).is_empty());
    }

    #[test]
    fn identifier_blind_equates_renamed_code() {
        use NormalizationMode::*;
        assert_eq!(
            norm("a = b + c", IdentifierBlind),
            norm("x = y + z", IdentifierBlind)
        );
        assert_ne!(norm("a = b + c", Exact), norm("x = y + z", Exact));
    }

    #[test]
    fn no_repeats_no_blocks() {
        let s = vec![(0..40).collect::<Vec<u32>>()];
        assert!(find_clone_runs(&s, 3).is_empty());
    }

    #[test]
    fn x_y_x_stream() {
        // X1..X5 Y1..Y5 X1..X5
        let s: Vec<u32> = (0..5).chain(10..15).chain(0..5).collect();
        let runs = find_clone_runs(&[s], 5);
        assert_eq!(
            runs,
            [RawClone {
                file_a: 0,
                start_a: 0,
                file_b: 0,
                start_b: 10,
                len: 5
            }]
        );
    }

    #[test]
    fn overlapping_self_repeat_is_split() {
        // period-4 pattern repeated 3 times: run at shift 4 has length 8.
        let s: Vec<u32> = [1, 2, 3, 4].repeat(3);
        let runs = find_clone_runs(&[s], 3);
        assert!(runs.contains(&RawClone {
            file_a: 0,
            start_a: 0,
            file_b: 0,
            start_b: 4,
            len: 4
        }));
        assert!(runs.contains(&RawClone {
            file_a: 0,
            start_a: 4,
            file_b: 0,
            start_b: 8,
            len: 4
        }));
        assert!(runs.contains(&RawClone {
            file_a: 0,
            start_a: 0,
            file_b: 0,
            start_b: 8,
            len: 4
        }));
        for r in &runs {
            assert!(r.start_a + r.len <= r.start_b);
        }
    }

    #[test]
    fn cross_file_clone() {
        let a: Vec<u32> = vec![9, 1, 2, 3, 4, 8];
        let b: Vec<u32> = vec![1, 2, 3, 4];
        let runs = find_clone_runs(&[a, b], 3);
        assert_eq!(
            runs,
            [RawClone {
                file_a: 0,
                start_a: 1,
                file_b: 1,
                start_b: 0,
                len: 4
            }]
        );
    }

    fn file_tokens(path: &str, src: &str) -> FileTokens {
        let registry = ProfileRegistry::builtin();
        let p = registry.get("c-family").unwrap();
        let tokens = tokenize(src, p).tokens;
        let lines = crate::lines::classify_lines(&tokens, crate::lexer::physical_lines(src));
        FileTokens {
            path: path.into(),
            tokens: normalize_tokens(&tokens, NormalizationMode::Exact),
            loc_lines: lines.totals.loc(),
        }
    }

    #[test]
    fn ratios_count_positions_once() {
        let f = file_tokens("a.c", "a b c d e\nf g h i j\na b c d e\n");
        let report = analyze_duplication(&[f], 5, NormalizationMode::Exact);
        assert_eq!(report.blocks.len(), 1);
        assert_eq!((report.duplicated_tokens, report.total_tokens), (10, 15));
        assert!((report.duplicated_token_ratio - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!((report.duplicated_lines, report.total_lines), (2, 3));
        assert_eq!(report.blocks[0].b.start_line, 3);
    }

    #[test]
    fn no_blocks_zero_ratios() {
        let f = file_tokens("a.c", "int x = 1;");
        let report = analyze_duplication(&[f], 5, NormalizationMode::Exact);
        assert_eq!(
            (report.duplicated_token_ratio, report.duplicated_line_ratio),
            (0.0, 0.0)
        );
        let empty = analyze_duplication(&[], 5, NormalizationMode::Exact);
        assert_eq!(empty.duplicated_token_ratio, 0.0);
    }

    #[test]
    fn swapped_labels_canonicalize() {
        let f = file_tokens("b.c", "a b c d e");
        let g = file_tokens("a.c", "a b c d e");
        let blocks = find_clone_blocks(&[f, g], 5);
        assert_eq!(blocks[0].a.file, "a.c");
        let mut swapped = blocks[0].clone();
        std::mem::swap(&mut swapped.a, &mut swapped.b);
        assert_eq!(canonical(swapped), blocks[0]);
    }
}
