//! Profile-driven tokenizer.

use serde::{Deserialize, Serialize};

use crate::error::{DiagnosticKind, SourceIssue};
use crate::profile::{LanguageProfile, StringDelimiter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TokenKind {
    Identifier,
    Keyword,
    Operator,
    Punctuation,
    NumberLiteral,
    StringLiteral,
    Comment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: usize,
    /// 1-based column (in characters) of the first character.
    pub column: usize,
    /// Byte offset of the first character in the source.
    pub offset: usize,
}

impl Token {
    pub fn is_comment(&self) -> bool {
        self.kind == TokenKind::Comment
    }

    /// Last line touched by this token (block comments and multi-line strings span lines).
    pub fn end_line(&self) -> usize {
        self.line + self.text.bytes().filter(|&b| b == b'\n').count()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tokenized {
    pub tokens: Vec<Token>,
    pub issues: Vec<SourceIssue>,
}

/// Splits `content` into tokens. Never fails: unterminated literals and
/// comments are reported as issues and swallowed to end of line or file.
pub fn tokenize(content: &str, profile: &LanguageProfile) -> Tokenized {
    Lexer::new(content, profile).run()
}

struct Lexer<'a> {
    src: &'a str,
    profile: &'a LanguageProfile,
    pos: usize,
    line: usize,
    column: usize,
    out: Tokenized,
    line_markers: Vec<&'a str>,
    block_markers: Vec<(&'a str, &'a str)>,
    strings: Vec<&'a StringDelimiter>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, profile: &'a LanguageProfile) -> Self {
        let spec = profile.spec();
        let mut line_markers: Vec<&str> = spec
            .line_comment_markers
            .iter()
            .map(String::as_str)
            .collect();
        line_markers.sort_by_key(|m| std::cmp::Reverse(m.len()));
        let mut block_markers: Vec<(&str, &str)> = spec
            .block_comment_delimiters
            .iter()
            .map(|(o, c)| (o.as_str(), c.as_str()))
            .collect();
        block_markers.sort_by_key(|(o, _)| std::cmp::Reverse(o.len()));
        let mut strings: Vec<&StringDelimiter> = spec.string_delimiters.iter().collect();
        strings.sort_by_key(|d| std::cmp::Reverse(d.open.len()));
        Self {
            src,
            profile,
            pos: 0,
            line: 1,
            column: 1,
            out: Tokenized::default(),
            line_markers,
            block_markers,
            strings,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn run(mut self) -> Tokenized {
        while let Some(c) = self.rest().chars().next() {
            if c == '\n' {
                self.pos += 1;
                self.line += 1;
                self.column = 1;
                continue;
            }
            if c.is_whitespace() {
                self.pos += c.len_utf8();
                self.column += 1;
                continue;
            }
            if self.try_comment() || self.try_string(self.pos) {
                continue;
            }
            let next = self.rest()[c.len_utf8()..].chars().next();
            if c.is_ascii_digit() || (c == '.' && next.is_some_and(|n| n.is_ascii_digit())) {
                self.lex_number();
            } else if self.profile.is_ident_start(c) {
                self.lex_word();
            } else {
                self.lex_symbol();
            }
        }
        self.out
    }

    fn try_comment(&mut self) -> bool {
        let rest = self.rest();
        let line_marker = self.line_markers.iter().find(|m| rest.starts_with(**m));
        let block = self
            .block_markers
            .iter()
            .find(|(o, _)| rest.starts_with(*o));
        match (line_marker, block) {
            (Some(m), Some((open, _))) if m.len() >= open.len() => self.line_comment(),
            (Some(_), None) => self.line_comment(),
            (_, Some(&(open, close))) => self.block_comment(open, close),
            (None, None) => return false,
        }
        true
    }

    fn line_comment(&mut self) {
        let rest = self.rest();
        let end = rest.find('\n').unwrap_or(rest.len());
        let text = rest[..end].trim_end_matches('\r');
        self.emit(TokenKind::Comment, self.pos, text.len());
    }

    fn block_comment(&mut self, open: &str, close: &str) {
        let rest = self.rest();
        let len = match rest[open.len()..].find(close) {
            Some(i) => open.len() + i + close.len(),
            None => {
                self.issue(
                    DiagnosticKind::UnterminatedComment,
                    format!("block comment opened with `{open}` is never closed"),
                );
                rest.len()
            }
        };
        self.emit(TokenKind::Comment, self.pos, len);
    }

    /// Lexes a string literal whose opening delimiter starts at `self.pos`;
    /// the token itself starts at `start` (earlier when a prefix is glued on).
    fn try_string(&mut self, start: usize) -> bool {
        let rest = self.rest();
        let Some(delim) = self.strings.iter().find(|d| rest.starts_with(&d.open)) else {
            return false;
        };
        let body_start = self.pos + delim.open.len();
        let mut chars = self.src[body_start..].char_indices();
        let mut end = None;
        let mut broke_at_newline = false;
        while let Some((i, ch)) = chars.next() {
            let at = body_start + i;
            if Some(ch) == delim.escape {
                chars.next();
                continue;
            }
            if self.src[at..].starts_with(&delim.close) {
                end = Some(at + delim.close.len());
                break;
            }
            if ch == '\n' && !delim.multiline {
                let mut stop = at;
                if self.src[..stop].ends_with('\r') {
                    stop -= 1;
                }
                end = Some(stop);
                broke_at_newline = true;
                break;
            }
        }
        let end = match end {
            Some(e) if !broke_at_newline => e,
            other => {
                self.issue(
                    DiagnosticKind::UnterminatedString,
                    format!(
                        "string literal opened with `{}` is never closed",
                        delim.open
                    ),
                );
                other.unwrap_or(self.src.len())
            }
        };
        self.emit_from(TokenKind::StringLiteral, start, end - start);
        true
    }

    fn lex_number(&mut self) {
        let bytes = self.rest().as_bytes();
        let hex = bytes.len() > 1 && bytes[0] == b'0' && matches!(bytes[1], b'x' | b'X');
        let mut len = 0;
        while len < bytes.len() {
            let b = bytes[len];
            let next_digit = bytes.get(len + 1).is_some_and(u8::is_ascii_digit);
            let ok = b.is_ascii_alphanumeric()
                || b == b'_'
                || (b == b'.' && next_digit)
                || (matches!(b, b'+' | b'-')
                    && !hex
                    && len > 0
                    && matches!(bytes[len - 1], b'e' | b'E')
                    && next_digit);
            if !ok {
                break;
            }
            len += 1;
        }
        self.emit(TokenKind::NumberLiteral, self.pos, len);
    }

    fn lex_word(&mut self) {
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|&(_, c)| !self.profile.is_ident_continue(c))
            .map_or(rest.len(), |(i, _)| i);
        let word = &rest[..len];
        if self.profile.is_string_prefix(word) {
            let start = self.pos;
            let (line, column) = (self.line, self.column);
            self.pos += len;
            self.column += word.chars().count();
            if self.try_string(start) {
                // `emit_from` advanced from `start`; restore its position bookkeeping.
                let token = self.out.tokens.last_mut().expect("string token emitted");
                token.line = line;
                token.column = column;
                return;
            }
            self.pos = start;
            self.line = line;
            self.column = column;
        }
        let kind = if self.profile.is_keyword(word) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        self.emit(kind, self.pos, len);
    }

    fn lex_symbol(&mut self) {
        let rest = self.rest();
        let matched = self
            .profile
            .symbols()
            .iter()
            .find(|s| rest.starts_with(s.as_str()));
        let (len, kind) = match matched {
            Some(sym) if self.profile.is_punctuation(sym) => (sym.len(), TokenKind::Punctuation),
            Some(sym) => (sym.len(), TokenKind::Operator),
            None => {
                let c = rest.chars().next().expect("non-empty");
                (c.len_utf8(), TokenKind::Punctuation)
            }
        };
        self.emit(kind, self.pos, len);
    }

    fn emit(&mut self, kind: TokenKind, start: usize, len: usize) {
        debug_assert_eq!(start, self.pos);
        self.emit_from(kind, start, len);
    }

    /// Emits `src[start..start+len]` and advances past it. `start` may precede
    /// `self.pos` when a string prefix has already been consumed.
    fn emit_from(&mut self, kind: TokenKind, start: usize, len: usize) {
        let text = &self.src[start..start + len];
        let token = Token {
            kind,
            text: text.to_string(),
            line: self.line,
            column: self.column,
            offset: start,
        };
        let consumed = &self.src[self.pos..start + len];
        for ch in consumed.chars() {
            if ch == '\n' {
                self.line += 1;
                self.column = 1;
            } else {
                self.column += 1;
            }
        }
        self.pos = start + len;
        self.out.tokens.push(token);
    }

    fn issue(&mut self, kind: DiagnosticKind, message: String) {
        self.out.issues.push(SourceIssue {
            kind,
            line: self.line,
            message,
        });
    }
}

/// Number of physical lines in `content` (a trailing newline does not open a new line).
pub fn physical_lines(content: &str) -> usize {
    content.lines().count()
}
