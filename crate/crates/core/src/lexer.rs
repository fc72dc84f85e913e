//! Physical-to-logical line preprocessing and tokenization.
//!
//! Comment and continuation conventions of the script language:
//!
//! * `#` starts a comment running to the end of the physical line, unless it
//!   appears inside a single-quoted string.
//! * `/* ... */` is a block comment. It may span physical lines and does not
//!   nest. Line breaks inside it are kept, so it never joins lines.
//! * A physical line whose content ends in `//` **or** `\\` continues on the
//!   next physical line. Note that `//` is *not* a line comment here.
//!
//! Keywords are matched case-insensitively and a trailing `:` (optionally
//! preceded by blanks) is absorbed into header, clause and set-operator
//! keyword tokens, so `where: x>1` and `WHERE x>1` lex to the same kinds.

use std::fmt;

use thiserror::Error;

use crate::diag::{Code, Diagnostic, Pos, Span};

/// Script text plus a label used in diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSource {
    pub name: String,
    pub text: String,
}

impl RawSource {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        RawSource {
            name: name.into(),
            text: text.into(),
        }
    }

    /// Decodes UTF-8 strictly; malformed input is an error, never replaced.
    pub fn from_bytes(name: impl Into<String>, bytes: &[u8]) -> Result<Self, LexError> {
        match std::str::from_utf8(bytes) {
            Ok(text) => Ok(RawSource::new(name, text)),
            Err(e) => {
                let valid = &bytes[..e.valid_up_to()];
                let line = valid.iter().filter(|b| **b == b'\n').count() as u32 + 1;
                let col = valid
                    .rsplit(|b| *b == b'\n')
                    .next()
                    .map(|l| String::from_utf8_lossy(l).chars().count() as u32 + 1)
                    .unwrap_or(1);
                Err(LexError::InvalidEncoding {
                    span: Span::point(Pos::new(line, col)),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("input is not valid UTF-8")]
    InvalidEncoding { span: Span },
    #[error("block comment is never closed")]
    UnterminatedBlockComment { span: Span },
    #[error("continuation marker on the last line of the file")]
    DanglingContinuation { span: Span },
    #[error("illegal character {ch:?}")]
    IllegalCharacter { ch: char, span: Span },
    #[error("string literal is never closed")]
    UnterminatedString { span: Span },
}

impl LexError {
    pub fn code(&self) -> Code {
        match self {
            LexError::InvalidEncoding { .. } => Code::InvalidEncoding,
            LexError::UnterminatedBlockComment { .. } => Code::UnterminatedBlockComment,
            LexError::DanglingContinuation { .. } => Code::DanglingContinuation,
            LexError::IllegalCharacter { .. } => Code::IllegalCharacter,
            LexError::UnterminatedString { .. } => Code::UnterminatedString,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            LexError::InvalidEncoding { span }
            | LexError::UnterminatedBlockComment { span }
            | LexError::DanglingContinuation { span }
            | LexError::IllegalCharacter { span, .. }
            | LexError::UnterminatedString { span } => *span,
        }
    }
}

impl From<&LexError> for Diagnostic {
    fn from(e: &LexError) -> Self {
        Diagnostic::error(e.code(), e.span(), e.to_string())
    }
}

/// Comment-free, continuation-joined text with its physical line range.
#[derive(Debug, Clone)]
pub struct LogicalLine {
    pub text: String,
    pub first_line: u32,
    pub last_line: u32,
    // physical position of every char in `text`
    positions: Vec<Pos>,
}

impl LogicalLine {
    /// Builds a line whose characters all sit on one physical line, starting at column 1.
    pub fn synthetic(text: &str, line: u32) -> Self {
        let positions = (1..=text.chars().count() as u32)
            .map(|c| Pos::new(line, c))
            .collect();
        LogicalLine {
            text: text.to_string(),
            first_line: line,
            last_line: line,
            positions,
        }
    }

    pub fn span(&self) -> (u32, u32) {
        (self.first_line, self.last_line)
    }

    fn pos_at(&self, idx: usize) -> Pos {
        self.positions
            .get(idx)
            .copied()
            .or_else(|| self.positions.last().copied())
            .unwrap_or(Pos::new(self.first_line, 1))
    }
}

impl PartialEq for LogicalLine {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

/// Strips comments, joins continuations and drops blank lines.
pub fn preprocess(source: &RawSource) -> Result<Vec<LogicalLine>, LexError> {
    let mut physical: Vec<&str> = source.text.split('\n').collect();
    if physical.last() == Some(&"") {
        physical.pop();
    }

    let mut out = Vec::new();
    let mut block_start: Option<Pos> = None;
    // (text, positions, first physical line) of a line being continued
    let mut pending: Option<(String, Vec<Pos>, u32)> = None;
    let total = physical.len();

    for (idx, raw) in physical.iter().enumerate() {
        let lineno = idx as u32 + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let chars: Vec<char> = line.chars().collect();
        let mut buf = String::new();
        let mut pos = Vec::new();
        let mut in_str = false;
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let here = Pos::new(lineno, i as u32 + 1);
            if block_start.is_some() {
                if c == '*' && chars.get(i + 1) == Some(&'/') {
                    block_start = None;
                    i += 2;
                } else {
                    i += 1;
                }
                continue;
            }
            if in_str {
                buf.push(c);
                pos.push(here);
                if c == '\'' {
                    in_str = false;
                }
                i += 1;
                continue;
            }
            match c {
                '\'' => {
                    in_str = true;
                    buf.push(c);
                    pos.push(here);
                    i += 1;
                }
                '#' => break,
                '/' if chars.get(i + 1) == Some(&'*') => {
                    block_start = Some(here);
                    buf.push(' ');
                    pos.push(here);
                    i += 2;
                }
                _ => {
                    buf.push(c);
                    pos.push(here);
                    i += 1;
                }
            }
        }

        let content_len = buf.trim_end().chars().count();
        let content: String = buf.chars().take(content_len).collect();
        let continues = !in_str && (content.ends_with("//") || content.ends_with("\\\\"));

        let first_line = pending.as_ref().map(|p| p.2).unwrap_or(lineno);
        let (mut acc, mut acc_pos) = pending.take().map(|(t, p, _)| (t, p)).unwrap_or_default();

        if continues {
            if idx + 1 == total {
                let marker = pos[content_len - 2];
                return Err(LexError::DanglingContinuation {
                    span: Span::new(marker, pos[content_len - 1]),
                });
            }
            acc.extend(buf.chars().take(content_len - 2));
            acc_pos.extend_from_slice(&pos[..content_len - 2]);
            pending = Some((acc, acc_pos, first_line));
            continue;
        }

        acc.push_str(&buf);
        acc_pos.extend_from_slice(&pos);
        if let Some(line) = finish_line(acc, acc_pos, first_line, lineno) {
            out.push(line);
        }
    }

    if let Some(start) = block_start {
        return Err(LexError::UnterminatedBlockComment {
            span: Span::point(start),
        });
    }
    Ok(out)
}

fn finish_line(text: String, pos: Vec<Pos>, first: u32, last: u32) -> Option<LogicalLine> {
    let chars: Vec<char> = text.chars().collect();
    let start = chars.iter().position(|c| !c.is_whitespace())?;
    let end = chars.iter().rposition(|c| !c.is_whitespace())? + 1;
    Some(LogicalLine {
        text: chars[start..end].iter().collect(),
        first_line: first,
        last_line: last,
        positions: pos[start..end].to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Table,
    Command,
    From,
    Where,
    GroupBy,
    Having,
    OrderBy,
    Same,
    Distinct,
    Insert,
    Update,
    Delete,
    Truncate,
    Create,
    Only,
    View,
    Index,
    Drop,
}

impl Keyword {
    pub fn as_str(&self) -> &'static str {
        match self {
            Keyword::Table => "TABLE",
            Keyword::Command => "COMMAND",
            Keyword::From => "FROM",
            Keyword::Where => "WHERE",
            Keyword::GroupBy => "GROUP BY",
            Keyword::Having => "HAVING",
            Keyword::OrderBy => "ORDER BY",
            Keyword::Same => "SAME",
            Keyword::Distinct => "DISTINCT",
            Keyword::Insert => "INSERT",
            Keyword::Update => "UPDATE",
            Keyword::Delete => "DELETE",
            Keyword::Truncate => "TRUNCATE",
            Keyword::Create => "CREATE",
            Keyword::Only => "ONLY",
            Keyword::View => "VIEW",
            Keyword::Index => "INDEX",
            Keyword::Drop => "DROP",
        }
    }

    fn lookup(upper: &str) -> Option<Keyword> {
        Some(match upper {
            "TABLE" => Keyword::Table,
            "COMMAND" => Keyword::Command,
            "FROM" => Keyword::From,
            "WHERE" => Keyword::Where,
            "HAVING" => Keyword::Having,
            "SAME" => Keyword::Same,
            "DISTINCT" => Keyword::Distinct,
            "INSERT" => Keyword::Insert,
            "UPDATE" => Keyword::Update,
            "DELETE" => Keyword::Delete,
            "TRUNCATE" => Keyword::Truncate,
            "CREATE" => Keyword::Create,
            "ONLY" => Keyword::Only,
            "VIEW" => Keyword::View,
            "INDEX" => Keyword::Index,
            "DROP" => Keyword::Drop,
            _ => return None,
        })
    }

    /// Header and clause keywords may carry a trailing colon.
    fn takes_colon(&self) -> bool {
        matches!(
            self,
            Keyword::Table
                | Keyword::Command
                | Keyword::From
                | Keyword::Where
                | Keyword::GroupBy
                | Keyword::Having
                | Keyword::OrderBy
                | Keyword::Same
        )
    }

    pub fn is_clause(&self) -> bool {
        matches!(
            self,
            Keyword::From | Keyword::Where | Keyword::GroupBy | Keyword::Having | Keyword::OrderBy
        )
    }
}

/// Words that never lex as identifiers.
pub fn is_reserved(word: &str) -> bool {
    let upper = word.to_ascii_uppercase();
    Keyword::lookup(&upper).is_some() || set_op(&upper).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetOperator {
    Union,
    Intersect,
    Minus,
}

impl SetOperator {
    pub fn as_str(&self) -> &'static str {
        match self {
            SetOperator::Union => "UNION",
            SetOperator::Intersect => "INTERSECT",
            SetOperator::Minus => "MINUS",
        }
    }
}

fn set_op(upper: &str) -> Option<SetOperator> {
    match upper {
        "UNION" => Some(SetOperator::Union),
        "INTERSECT" => Some(SetOperator::Intersect),
        "MINUS" => Some(SetOperator::Minus),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    LBrace,
    RBrace,
    Keyword(Keyword),
    Ident,
    Number,
    Str,
    /// `==` or `=`
    Assign,
    Operator,
    Comma,
    LParen,
    RParen,
    Dot,
    Star,
    SetOp(SetOperator),
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::LBrace => f.write_str("LBRACE"),
            TokenKind::RBrace => f.write_str("RBRACE"),
            TokenKind::Keyword(k) => write!(f, "KEYWORD({})", k.as_str()),
            TokenKind::Ident => f.write_str("IDENT"),
            TokenKind::Number => f.write_str("NUMBER"),
            TokenKind::Str => f.write_str("STRING"),
            TokenKind::Assign => f.write_str("ASSIGN"),
            TokenKind::Operator => f.write_str("OPERATOR"),
            TokenKind::Comma => f.write_str("COMMA"),
            TokenKind::LParen => f.write_str("LPAREN"),
            TokenKind::RParen => f.write_str("RPAREN"),
            TokenKind::Dot => f.write_str("DOT"),
            TokenKind::Star => f.write_str("STAR"),
            TokenKind::SetOp(op) => write!(f, "SET_OP({})", op.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn has_colon(&self) -> bool {
        matches!(self.kind, TokenKind::Keyword(_) | TokenKind::SetOp(_))
            && self.lexeme.ends_with(':')
    }

    pub fn is_keyword(&self, kw: Keyword) -> bool {
        self.kind == TokenKind::Keyword(kw)
    }

    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Operator && self.lexeme == op
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Splits one logical line into tokens (longest match).
pub fn tokenize(line: &LogicalLine) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = line.text.chars().collect();
    let span_of = |a: usize, b: usize| Span::new(line.pos_at(a), line.pos_at(b - 1));
    let mut tokens = Vec::new();
    let mut i = 0;

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = match c {
            '{' => {
                i += 1;
                TokenKind::LBrace
            }
            '}' => {
                i += 1;
                TokenKind::RBrace
            }
            '(' => {
                i += 1;
                TokenKind::LParen
            }
            ')' => {
                i += 1;
                TokenKind::RParen
            }
            ',' => {
                i += 1;
                TokenKind::Comma
            }
            '.' => {
                i += 1;
                TokenKind::Dot
            }
            '*' => {
                i += 1;
                TokenKind::Star
            }
            '=' => {
                i += if chars.get(i + 1) == Some(&'=') { 2 } else { 1 };
                TokenKind::Assign
            }
            '+' | '-' | '/' => {
                i += 1;
                TokenKind::Operator
            }
            '<' => {
                i += match chars.get(i + 1) {
                    Some('=') | Some('>') => 2,
                    _ => 1,
                };
                TokenKind::Operator
            }
            '>' => {
                i += if chars.get(i + 1) == Some(&'=') { 2 } else { 1 };
                TokenKind::Operator
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                i += 2;
                TokenKind::Operator
            }
            '|' if chars.get(i + 1) == Some(&'|') => {
                i += 2;
                TokenKind::Operator
            }
            '\'' => {
                i += 1;
                loop {
                    match chars.get(i) {
                        None => {
                            return Err(LexError::UnterminatedString {
                                span: span_of(start, chars.len()),
                            })
                        }
                        Some('\'') if chars.get(i + 1) == Some(&'\'') => i += 2,
                        Some('\'') => {
                            i += 1;
                            break;
                        }
                        Some(_) => i += 1,
                    }
                }
                TokenKind::Str
            }
            c if c.is_ascii_digit() => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if chars.get(i) == Some(&'.')
                    && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())
                {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                TokenKind::Number
            }
            c if is_ident_start(c) => {
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i]
                    .iter()
                    .collect::<String>()
                    .to_ascii_uppercase();
                let kind = match word.as_str() {
                    "GROUP" | "ORDER" => match following_word(&chars, i) {
                        Some((s, e)) if eq_word(&chars[s..e], "BY") => {
                            i = e;
                            TokenKind::Keyword(if word == "GROUP" {
                                Keyword::GroupBy
                            } else {
                                Keyword::OrderBy
                            })
                        }
                        _ => TokenKind::Ident,
                    },
                    w => match (Keyword::lookup(w), set_op(w)) {
                        (Some(k), _) => TokenKind::Keyword(k),
                        (_, Some(op)) => TokenKind::SetOp(op),
                        _ => TokenKind::Ident,
                    },
                };
                let absorbs = match kind {
                    TokenKind::Keyword(k) => k.takes_colon(),
                    TokenKind::SetOp(_) => true,
                    _ => false,
                };
                if absorbs {
                    let mut j = i;
                    while j < chars.len() && chars[j].is_whitespace() {
                        j += 1;
                    }
                    if chars.get(j) == Some(&':') {
                        i = j + 1;
                    }
                }
                kind
            }
            other => {
                return Err(LexError::IllegalCharacter {
                    ch: other,
                    span: span_of(i, i + 1),
                })
            }
        };
        tokens.push(Token {
            kind,
            lexeme: chars[start..i].iter().collect(),
            span: span_of(start, i),
        });
    }
    Ok(tokens)
}

fn following_word(chars: &[char], from: usize) -> Option<(usize, usize)> {
    let mut s = from;
    while s < chars.len() && chars[s].is_whitespace() {
        s += 1;
    }
    if s == from || s >= chars.len() || !is_ident_start(chars[s]) {
        return None;
    }
    let mut e = s;
    while e < chars.len() && is_ident_char(chars[e]) {
        e += 1;
    }
    Some((s, e))
}

fn eq_word(chars: &[char], word: &str) -> bool {
    chars.iter().collect::<String>().eq_ignore_ascii_case(word)
}

/// Preprocesses and tokenizes a whole source, one token vector per logical line.
pub fn lex(source: &RawSource) -> Result<Vec<(LogicalLine, Vec<Token>)>, LexError> {
    preprocess(source)?
        .into_iter()
        .map(|line| {
            let toks = tokenize(&line)?;
            Ok((line, toks))
        })
        .collect()
}
