//! Unit (function / method / paragraph) extraction.
//!
//! Three detection styles cover the shipped profiles:
//!
//! * `brace-block`: `<introducer> name ( params ) [qualifiers] { body }`, where the
//!   introducer is a unit keyword, a type-like identifier, or one of `> ] * & ::`.
//!   This catches C, Java, C# and JavaScript definitions without a grammar.
//! * `indent-block`: `def name ( params ) [-> ann] :` followed by the maximal block of
//!   logical lines indented deeper than the header.
//! * `keyword-pair`: `PARAGRAPH name [( params )]` up to the matching close keyword.
//!
//! Units may nest. The inner unit's tokens are excluded from the outer one's
//! metrics, so every token is attributed to exactly one unit.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{DiagnosticKind, SourceIssue};
use crate::lexer::{Token, TokenKind};
use crate::profile::{LanguageProfile, UnitDetection};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub name: String,
    pub file: String,
    pub start_line: usize,
    pub end_line: usize,
    pub param_count: usize,
    /// Indices into the file's token sequence (comments included).
    pub token_range: Range<usize>,
    pub nesting_depth_max: usize,
    /// Token ranges of units nested inside this one.
    pub nested: Vec<Range<usize>>,
    /// Line spans of units nested inside this one.
    pub nested_lines: Vec<(usize, usize)>,
}

impl Unit {
    /// Indices of the tokens that belong to this unit and not to a nested one.
    pub fn own_token_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.token_range
            .clone()
            .filter(move |i| !self.nested.iter().any(|r| r.contains(i)))
    }

    /// Non-comment tokens owned by this unit.
    pub fn own_code_tokens<'t>(&'t self, tokens: &'t [Token]) -> impl Iterator<Item = &'t Token> {
        self.own_token_indices()
            .map(move |i| &tokens[i])
            .filter(|t| !t.is_comment())
    }

    fn is_in_nested(&self, index: usize) -> bool {
        self.nested.iter().any(|r| r.contains(&index))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Segmented {
    pub units: Vec<Unit>,
    pub issues: Vec<SourceIssue>,
}

/// Unit before nesting resolution.
struct Candidate {
    name: String,
    start_line: usize,
    end_line: usize,
    param_count: usize,
    token_range: Range<usize>,
    /// Body tokens (indices into the full sequence) used for depth computation.
    body: Range<usize>,
}

pub fn extract_units(tokens: &[Token], profile: &LanguageProfile) -> Segmented {
    let code: Vec<usize> = (0..tokens.len())
        .filter(|&i| !tokens[i].is_comment())
        .collect();
    let scan = Scan {
        tokens,
        code: &code,
        profile,
    };
    let mut issues = Vec::new();
    let candidates = match profile.unit_detection() {
        UnitDetection::BraceBlock => scan.brace_units(&mut issues),
        UnitDetection::IndentBlock => scan.indent_units(&mut issues),
        UnitDetection::KeywordPair => scan.keyword_units(&mut issues),
    };

    let mut candidates = candidates;
    candidates.sort_by_key(|c| (c.token_range.start, std::cmp::Reverse(c.token_range.end)));
    let mut kept: Vec<Candidate> = Vec::new();
    for c in candidates {
        let partial = kept.iter().any(|k| {
            let disjoint = c.token_range.start >= k.token_range.end
                || c.token_range.end <= k.token_range.start;
            let inside = c.token_range.start >= k.token_range.start
                && c.token_range.end <= k.token_range.end;
            !disjoint && !inside
        });
        if !partial {
            kept.push(c);
        }
    }

    let mut units: Vec<Unit> = kept
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let inner: Vec<&Candidate> = kept
                .iter()
                .enumerate()
                .filter(|&(j, o)| {
                    j != i
                        && o.token_range.start >= c.token_range.start
                        && o.token_range.end <= c.token_range.end
                })
                .map(|(_, o)| o)
                .collect();
            Unit {
                name: c.name.clone(),
                file: String::new(),
                start_line: c.start_line,
                end_line: c.end_line,
                param_count: c.param_count,
                token_range: c.token_range.clone(),
                nesting_depth_max: 0,
                nested: inner.iter().map(|o| o.token_range.clone()).collect(),
                nested_lines: inner.iter().map(|o| (o.start_line, o.end_line)).collect(),
            }
        })
        .collect();
    for (unit, candidate) in units.iter_mut().zip(&kept) {
        unit.nesting_depth_max = scan.nesting_depth(unit, &candidate.body);
    }
    Segmented { units, issues }
}

struct Scan<'a> {
    tokens: &'a [Token],
    /// Indices of non-comment tokens.
    code: &'a [usize],
    profile: &'a LanguageProfile,
}

impl Scan<'_> {
    fn tok(&self, k: usize) -> &Token {
        &self.tokens[self.code[k]]
    }

    fn text(&self, k: usize) -> &str {
        &self.tokens[self.code[k]].text
    }

    fn is(&self, k: usize, text: &str) -> bool {
        k < self.code.len() && self.text(k) == text
    }

    /// Position (in `code`) of the bracket closing the one at `open`.
    fn matching(&self, open: usize, open_text: &str, close_text: &str) -> Option<usize> {
        let mut depth = 0usize;
        for k in open..self.code.len() {
            let t = self.text(k);
            if t == open_text {
                depth += 1;
            } else if t == close_text {
                depth -= 1;
                if depth == 0 {
                    return Some(k);
                }
            }
        }
        None
    }

    /// Top-level comma count + 1 for the list strictly between `open` and `close`.
    fn param_count(&self, open: usize, close: usize) -> usize {
        let inner = open + 1..close;
        if inner.is_empty() {
            return 0;
        }
        if inner.len() == 1 && self.profile.fold(self.text(open + 1)) == self.profile.fold("void") {
            return 0;
        }
        let track_angles = self.profile.unit_detection() == UnitDetection::BraceBlock;
        let mut depth = 0i64;
        let mut angle = 0i64;
        let mut commas = 0;
        for k in inner.clone() {
            match self.text(k) {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                "<" if track_angles => angle += 1,
                ">" if track_angles => angle = (angle - 1).max(0),
                ">>" if track_angles => angle = (angle - 2).max(0),
                "," if depth == 0 && angle == 0 && !self.is(k + 1, ")") && k + 1 != close => {
                    commas += 1
                }
                _ => {}
            }
        }
        commas + 1
    }

    fn unbalanced(&self, issues: &mut Vec<SourceIssue>, k: usize, what: &str) {
        issues.push(SourceIssue {
            kind: DiagnosticKind::UnbalancedDelimiters,
            line: self.tok(k).line,
            message: format!("unit `{what}` has unbalanced delimiters; skipped"),
        });
    }

    /// Full-sequence index range covering `code[first..=last]` (comments inside included).
    fn span(&self, first: usize, last: usize) -> Range<usize> {
        self.code[first]..self.code[last] + 1
    }

    fn brace_units(&self, issues: &mut Vec<SourceIssue>) -> Vec<Candidate> {
        let mut out = Vec::new();
        for k in 1..self.code.len() {
            let name = self.tok(k);
            if name.kind != TokenKind::Identifier || !self.is(k + 1, "(") {
                continue;
            }
            let prev = self.tok(k - 1);
            let introduced = match prev.kind {
                TokenKind::Identifier => true,
                TokenKind::Keyword => self.profile.is_unit_keyword(&prev.text),
                _ => matches!(prev.text.as_str(), ">" | ">>" | "]" | "*" | "&" | "::"),
            };
            if !introduced {
                continue;
            }
            let Some(close_paren) = self.matching(k + 1, "(", ")") else {
                self.unbalanced(issues, k, &name.text);
                continue;
            };
            // Qualifiers between `)` and `{`: `const`, `throws X, Y`, `noexcept`...
            let mut j = close_paren + 1;
            let mut body_open = None;
            while j < self.code.len() && j <= close_paren + 16 {
                let t = self.tok(j);
                if t.text == "{" {
                    body_open = Some(j);
                    break;
                }
                let qualifier = matches!(t.kind, TokenKind::Identifier | TokenKind::Keyword)
                    || matches!(t.text.as_str(), "," | "." | "::");
                if !qualifier {
                    break;
                }
                j += 1;
            }
            let Some(body_open) = body_open else {
                continue;
            };
            let Some(body_close) = self.matching(body_open, "{", "}") else {
                self.unbalanced(issues, k, &name.text);
                continue;
            };
            let mut first = k;
            while first > 0 {
                let t = self.tok(first - 1);
                let declaration_part = match t.kind {
                    TokenKind::Identifier => true,
                    TokenKind::Keyword => self.profile.is_unit_keyword(&t.text),
                    _ => matches!(
                        t.text.as_str(),
                        "<" | ">" | ">>" | "[" | "]" | "*" | "&" | "::"
                    ),
                };
                if !declaration_part {
                    break;
                }
                first -= 1;
            }
            out.push(Candidate {
                name: name.text.clone(),
                start_line: self.tok(first).line,
                end_line: self.tok(body_close).end_line(),
                param_count: self.param_count(k + 1, close_paren),
                token_range: self.span(first, body_close),
                body: self.span(body_open, body_close),
            });
        }
        out
    }

    /// For each code token, whether it starts a logical line (bracket depth 0,
    /// first on its physical line, not a backslash continuation).
    fn logical_starts(&self) -> Vec<bool> {
        let mut starts = vec![false; self.code.len()];
        let mut depth = 0i64;
        let mut prev_line = 0;
        for (k, start) in starts.iter_mut().enumerate() {
            let t = self.tok(k);
            let continued = k > 0 && self.text(k - 1) == "\\";
            if t.line != prev_line && depth <= 0 && !continued {
                *start = true;
            }
            prev_line = t.end_line();
            match t.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                _ => {}
            }
        }
        starts
    }

    fn indent_units(&self, issues: &mut Vec<SourceIssue>) -> Vec<Candidate> {
        let starts = self.logical_starts();
        let mut out = Vec::new();
        for k in 0..self.code.len() {
            let kw = self.tok(k);
            if kw.kind != TokenKind::Keyword || !self.profile.is_unit_keyword(&kw.text) {
                continue;
            }
            if k + 1 >= self.code.len() || self.tok(k + 1).kind != TokenKind::Identifier {
                continue;
            }
            let name = &self.tok(k + 1).text;
            if !self.is(k + 2, "(") {
                continue;
            }
            let Some(close_paren) = self.matching(k + 2, "(", ")") else {
                self.unbalanced(issues, k, name);
                continue;
            };
            // `:` ends the header; allow a return annotation before it.
            let mut colon = None;
            let mut j = close_paren + 1;
            while j < self.code.len() && !starts[j] {
                if self.text(j) == ":" {
                    colon = Some(j);
                    break;
                }
                j += 1;
            }
            let Some(colon) = colon else {
                self.unbalanced(issues, k, name);
                continue;
            };
            let mut header = k;
            while header > 0 && !starts[header] {
                header -= 1;
            }
            let header_indent = self.tok(header).column;

            let mut last = colon;
            let mut m = colon + 1;
            let one_liner = m < self.code.len() && self.tok(m).line == self.tok(colon).line;
            while m < self.code.len() {
                if starts[m] && (one_liner || self.tok(m).column <= header_indent) {
                    break;
                }
                last = m;
                m += 1;
            }
            out.push(Candidate {
                name: name.clone(),
                start_line: self.tok(header).line,
                end_line: self.tok(last).end_line(),
                param_count: self.param_count(k + 2, close_paren),
                token_range: self.span(header, last),
                body: if last > colon {
                    self.span(colon + 1, last)
                } else {
                    self.code[colon] + 1..self.code[colon] + 1
                },
            });
        }
        out
    }

    fn keyword_units(&self, issues: &mut Vec<SourceIssue>) -> Vec<Candidate> {
        let mut out = Vec::new();
        for k in 0..self.code.len() {
            let kw = self.tok(k);
            if kw.kind != TokenKind::Keyword || !self.profile.is_unit_keyword(&kw.text) {
                continue;
            }
            if k + 1 >= self.code.len() || self.tok(k + 1).kind != TokenKind::Identifier {
                continue;
            }
            let name = &self.tok(k + 1).text;
            let mut body_start = k + 2;
            let mut param_count = 0;
            if self.is(k + 2, "(") {
                let Some(close_paren) = self.matching(k + 2, "(", ")") else {
                    self.unbalanced(issues, k, name);
                    continue;
                };
                param_count = self.param_count(k + 2, close_paren);
                body_start = close_paren + 1;
            }
            let mut depth = 1usize;
            let mut close = None;
            for m in k + 1..self.code.len() {
                let t = self.tok(m);
                if t.kind != TokenKind::Keyword {
                    continue;
                }
                if self.profile.is_unit_keyword(&t.text) {
                    depth += 1;
                } else if self.profile.is_unit_close_keyword(&t.text) {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(m);
                        break;
                    }
                }
            }
            let Some(mut close) = close else {
                self.unbalanced(issues, k, name);
                continue;
            };
            if self.is(close + 1, ".") && self.tok(close + 1).line == self.tok(close).line {
                close += 1;
            }
            out.push(Candidate {
                name: name.clone(),
                start_line: kw.line,
                end_line: self.tok(close).end_line(),
                param_count,
                token_range: self.span(k, close),
                body: if body_start <= close {
                    self.span(body_start.min(close), close)
                } else {
                    self.code[close] + 1..self.code[close] + 1
                },
            });
        }
        out
    }

    /// Maximum block-nesting depth inside the unit body, ignoring nested units.
    fn nesting_depth(&self, unit: &Unit, body: &Range<usize>) -> usize {
        let own: Vec<&Token> = body
            .clone()
            .filter(|&i| !unit.is_in_nested(i))
            .map(|i| &self.tokens[i])
            .filter(|t| !t.is_comment())
            .collect();
        match self.profile.unit_detection() {
            UnitDetection::BraceBlock => {
                // The body's own braces sit at depth 1.
                let mut depth = 0i64;
                let mut max = 0i64;
                for t in &own {
                    match t.text.as_str() {
                        "{" => {
                            depth += 1;
                            max = max.max(depth);
                        }
                        "}" => depth -= 1,
                        _ => {}
                    }
                }
                (max - 1).max(0) as usize
            }
            UnitDetection::IndentBlock => {
                let starts = self.logical_starts();
                let mut stack: Vec<usize> = Vec::new();
                let mut max = 0;
                for (k, &i) in self.code.iter().enumerate() {
                    if !body.contains(&i) || unit.is_in_nested(i) || !starts[k] {
                        continue;
                    }
                    let indent = self.tokens[i].column;
                    while stack.last().is_some_and(|&top| top > indent) {
                        stack.pop();
                    }
                    if stack.last().is_none_or(|&top| top < indent) {
                        stack.push(indent);
                    }
                    max = max.max(stack.len().saturating_sub(1));
                }
                max
            }
            UnitDetection::KeywordPair => {
                // Only opens with a matching close count as blocks.
                let mut stack: Vec<(usize, usize)> = Vec::new();
                let mut matched = vec![false; own.len()];
                for (pos, t) in own.iter().enumerate() {
                    if t.kind != TokenKind::Keyword {
                        continue;
                    }
                    if let Some(pair) = self.profile.nesting_open(&t.text) {
                        stack.push((pair, pos));
                    } else if let Some(pair) = self.profile.nesting_close(&t.text) {
                        if let Some(at) = stack.iter().rposition(|&(p, _)| p == pair) {
                            matched[stack[at].1] = true;
                            matched[pos] = true;
                            stack.truncate(at);
                        }
                    }
                }
                let mut depth = 0usize;
                let mut max = 0usize;
                for (pos, t) in own.iter().enumerate() {
                    if !matched[pos] {
                        continue;
                    }
                    if self.profile.nesting_open(&t.text).is_some() {
                        depth += 1;
                        max = max.max(depth);
                    } else {
                        depth -= 1;
                    }
                }
                max
            }
        }
    }
}
