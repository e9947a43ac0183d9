//! Per-line code/comment/blank classification.

use serde::{Deserialize, Serialize};

use crate::lexer::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineClass {
    Code,
    Comment,
    Blank,
    Mixed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineTotals {
    pub code: usize,
    pub comment: usize,
    pub blank: usize,
    pub mixed: usize,
}

impl LineTotals {
    pub fn physical(&self) -> usize {
        self.code + self.comment + self.blank + self.mixed
    }

    /// Lines carrying code: `code + mixed`.
    pub fn loc(&self) -> usize {
        self.code + self.mixed
    }

    pub fn add(&mut self, other: &LineTotals) {
        self.code += other.code;
        self.comment += other.comment;
        self.blank += other.blank;
        self.mixed += other.mixed;
    }

    fn count(&mut self, class: LineClass) {
        match class {
            LineClass::Code => self.code += 1,
            LineClass::Comment => self.comment += 1,
            LineClass::Blank => self.blank += 1,
            LineClass::Mixed => self.mixed += 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineClassification {
    /// Class of line `i + 1`.
    pub lines: Vec<LineClass>,
    pub totals: LineTotals,
}

impl LineClassification {
    pub fn physical_lines(&self) -> usize {
        self.lines.len()
    }

    /// Class of a 1-based line number.
    pub fn class_of(&self, line: usize) -> Option<LineClass> {
        line.checked_sub(1).and_then(|i| self.lines.get(i).copied())
    }

    pub fn is_loc(&self, line: usize) -> bool {
        matches!(
            self.class_of(line),
            Some(LineClass::Code | LineClass::Mixed)
        )
    }
}

/// Tags every physical line. Multi-line tokens mark every line they span.
pub fn classify_lines(tokens: &[Token], physical_lines: usize) -> LineClassification {
    let mut has_code = vec![false; physical_lines];
    let mut has_comment = vec![false; physical_lines];
    for token in tokens {
        let target = if token.is_comment() {
            &mut has_comment
        } else {
            &mut has_code
        };
        let last = token.end_line().min(physical_lines);
        for line in token.line..=last {
            target[line - 1] = true;
        }
    }
    let mut totals = LineTotals::default();
    let lines = has_code
        .into_iter()
        .zip(has_comment)
        .map(|(code, comment)| {
            let class = match (code, comment) {
                (true, true) => LineClass::Mixed,
                (true, false) => LineClass::Code,
                (false, true) => LineClass::Comment,
                (false, false) => LineClass::Blank,
            };
            totals.count(class);
            class
        })
        .collect();
    LineClassification { lines, totals }
}
