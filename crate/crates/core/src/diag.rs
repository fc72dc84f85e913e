//! Source positions, diagnostic codes and their line-oriented rendering.

use std::fmt;

/// A 1-based position in the physical source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

/// Inclusive range of physical positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Self {
        Span { start, end }
    }

    pub fn point(pos: Pos) -> Self {
        Span {
            start: pos,
            end: pos,
        }
    }

    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("ERROR"),
            Severity::Warning => f.write_str("WARNING"),
        }
    }
}

macro_rules! codes {
    ($($name:ident),* $(,)?) => {
        /// Stable identifiers for every diagnostic the toolchain can produce.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Code {
            $($name),*
        }

        impl Code {
            pub fn as_str(&self) -> &'static str {
                match self {
                    $(Code::$name => stringify!($name)),*
                }
            }
        }
    };
}

codes! {
    // lexer
    InvalidEncoding,
    UnterminatedBlockComment,
    DanglingContinuation,
    IllegalCharacter,
    UnterminatedString,
    // parser
    UnbalancedBraces,
    TrailingSetOperator,
    JunkBetweenBlocks,
    MissingTable,
    MissingCommand,
    UnknownCommand,
    DuplicateClause,
    NestedBlockOutsideUpdate,
    ClauseNotAllowed,
    ExpectedAssignment,
    InvalidTarget,
    EmptyExpression,
    DistinctNotFirst,
    MultipleAliases,
    DanglingOperator,
    UnbalancedParens,
    UnexpectedToken,
    EmptyClause,
    InvalidTableRef,
    SameWithAssignments,
    SingleEquals,
    MissingColon,
    // analyzer
    SameInFirstBlock,
    SameOutsideChain,
    MixedWildcard,
    ArityMismatch,
    MissingFrom,
    IndexTableMismatch,
    InvalidIndexColumn,
    DeleteFromMismatch,
    DeleteMultipleFrom,
    SetChainShapeMismatch,
    ValuesWithClauses,
    EmptyAssignments,
    AssignmentsNotAllowed,
    WildcardNotAllowed,
    SelectModifierNotAllowed,
    NestedTargetExpr,
    InvalidChainCommand,
    ChainCommandMismatch,
    ChainTargetMismatch,
    OrderByInNonFinalBlock,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `SEVERITY CODE file:line: message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{} {} {}:{}: {}",
            self.severity, self.code, file, self.span.start.line, self.message
        )
    }
}

/// Orders diagnostics by span, then severity, then code, keeping the result stable.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        a.span
            .start
            .cmp(&b.span.start)
            .then(a.severity.cmp(&b.severity))
            .then(a.code.as_str().cmp(b.code.as_str()))
    });
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
