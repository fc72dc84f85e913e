//! Syntax tree shared by the parser, analyzer, emitter and runner.

use std::fmt;

use crate::diag::Span;
pub use crate::lexer::SetOperator;
use crate::lexer::TokenKind;

/// Dotted name such as `OMC.TEMP_TRAFFIC`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QualifiedName(pub Vec<String>);

impl QualifiedName {
    pub fn simple(name: impl Into<String>) -> Self {
        QualifiedName(vec![name.into()])
    }

    pub fn last(&self) -> &str {
        self.0.last().map(String::as_str).unwrap_or("")
    }

    pub fn eq_ignore_case(&self, other: &QualifiedName) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.eq_ignore_ascii_case(b))
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("."))
    }
}

impl From<&str> for QualifiedName {
    fn from(s: &str) -> Self {
        QualifiedName(s.split('.').map(str::to_string).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Script {
    pub chains: Vec<Chain>,
}

impl Script {
    pub fn blocks(&self) -> impl Iterator<Item = &OperationBlock> {
        self.chains.iter().flat_map(|c| c.blocks.iter())
    }

    /// Copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> Script {
        let mut s = self.clone();
        for chain in &mut s.chains {
            for block in &mut chain.blocks {
                block.span = Span::default();
            }
        }
        s
    }
}

/// Structural equality ignoring source locations.
pub fn equals(a: &Script, b: &Script) -> bool {
    a.without_spans() == b.without_spans()
}

/// Blocks joined by set operators; `connectors.len() == blocks.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub blocks: Vec<OperationBlock>,
    pub connectors: Vec<SetOperator>,
}

impl Chain {
    pub fn single(block: OperationBlock) -> Self {
        Chain {
            blocks: vec![block],
            connectors: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommandKind {
    InsertSelect,
    InsertValues,
    Update,
    Delete,
    Truncate,
    CreateView,
    CreateTableBasic,
    CreateTableAs,
    DropTable,
    DropView,
    CreateIndex,
}

impl CommandKind {
    pub const ALL: [CommandKind; 11] = [
        CommandKind::InsertSelect,
        CommandKind::InsertValues,
        CommandKind::Update,
        CommandKind::Delete,
        CommandKind::Truncate,
        CommandKind::CreateView,
        CommandKind::CreateTableBasic,
        CommandKind::CreateTableAs,
        CommandKind::DropTable,
        CommandKind::DropView,
        CommandKind::CreateIndex,
    ];

    /// Surface spelling used by the canonical printer.
    pub fn keyword(&self) -> &'static str {
        match self {
            CommandKind::InsertSelect | CommandKind::InsertValues => "INSERT",
            CommandKind::Update => "UPDATE",
            CommandKind::Delete => "DELETE",
            CommandKind::Truncate => "TRUNCATE",
            CommandKind::CreateView => "CREATE VIEW",
            CommandKind::CreateTableBasic => "ONLY CREATE",
            CommandKind::CreateTableAs => "CREATE",
            CommandKind::DropTable => "DROP",
            CommandKind::DropView => "DROP VIEW",
            CommandKind::CreateIndex => "CREATE INDEX",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::InsertSelect => "INSERT_SELECT",
            CommandKind::InsertValues => "INSERT_VALUES",
            CommandKind::Update => "UPDATE",
            CommandKind::Delete => "DELETE",
            CommandKind::Truncate => "TRUNCATE",
            CommandKind::CreateView => "CREATE_VIEW",
            CommandKind::CreateTableBasic => "CREATE_TABLE_BASIC",
            CommandKind::CreateTableAs => "CREATE_TABLE_AS",
            CommandKind::DropTable => "DROP_TABLE",
            CommandKind::DropView => "DROP_VIEW",
            CommandKind::CreateIndex => "CREATE_INDEX",
        }
    }

    /// Commands whose body is a select and may be combined by set operators.
    pub fn is_query_family(&self) -> bool {
        matches!(
            self,
            CommandKind::InsertSelect | CommandKind::CreateView | CommandKind::CreateTableAs
        )
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One `{ ... }` unit.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationBlock {
    pub table: QualifiedName,
    pub command: CommandKind,
    pub assignments: Vec<Assignment>,
    /// The select list was written as `SAME:==SAME:`.
    pub same_marker: bool,
    pub nested: Option<NestedSelect>,
    pub from: Vec<TableRef>,
    pub filter: Vec<Condition>,
    pub group_by: Vec<Expression>,
    pub having: Vec<Condition>,
    pub order_by: Vec<OrderItem>,
    pub span: Span,
}

impl OperationBlock {
    pub fn new(table: impl Into<QualifiedName>, command: CommandKind) -> Self {
        OperationBlock {
            table: table.into(),
            command,
            assignments: Vec::new(),
            same_marker: false,
            nested: None,
            from: Vec::new(),
            filter: Vec::new(),
            group_by: Vec::new(),
            having: Vec::new(),
            order_by: Vec::new(),
            span: Span::default(),
        }
    }

    pub fn has_wildcard(&self) -> bool {
        self.assignments
            .iter()
            .any(|a| a.target == Target::Wildcard)
    }

    pub fn has_clauses(&self) -> bool {
        !(self.from.is_empty()
            && self.filter.is_empty()
            && self.group_by.is_empty()
            && self.having.is_empty()
            && self.order_by.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub target: Target,
    pub expr: Expression,
    pub alias: Option<String>,
    pub distinct: bool,
}

impl Assignment {
    pub fn new(target: Target, expr: Expression) -> Self {
        Assignment {
            target,
            expr,
            alias: None,
            distinct: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Column(QualifiedName),
    /// `*`: positional, no column list.
    Wildcard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

/// Flat left-to-right chain of terms; no precedence is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    pub first: Term,
    pub rest: Vec<(ArithOp, Term)>,
}

impl Expression {
    pub fn term(term: Term) -> Self {
        Expression {
            first: term,
            rest: Vec::new(),
        }
    }

    pub fn column(name: &str) -> Self {
        Expression::term(Term::Column(name.into()))
    }

    pub fn as_column(&self) -> Option<&QualifiedName> {
        match (&self.first, self.rest.is_empty()) {
            (Term::Column(name), true) => Some(name),
            _ => None,
        }
    }

    pub fn is_star(&self) -> bool {
        self.rest.is_empty() && self.first == Term::Star
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Column(QualifiedName),
    /// Digits with optional fraction and leading minus, verbatim.
    Number(String),
    /// Including the surrounding quotes.
    Str(String),
    Call {
        name: String,
        args: Vec<Expression>,
    },
    Star,
    /// Column type text of a basic `ONLY CREATE` table.
    TypeDecl(String),
    Paren(Box<Expression>),
}

/// Subquery of a nested (tuple) UPDATE.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedSelect {
    pub items: Vec<Assignment>,
    pub from: Vec<TableRef>,
    pub filter: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRef {
    pub name: QualifiedName,
    pub alias: Option<String>,
}

/// One token of a pass-through condition.
#[derive(Debug, Clone, PartialEq)]
pub struct CondToken {
    pub kind: TokenKind,
    pub text: String,
}

/// Balanced token run of one boolean condition; conditions of a clause are ANDed.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub tokens: Vec<CondToken>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderItem {
    pub expr: Expression,
    pub direction: Option<Direction>,
}

/// Joins tokens the way both printers do: a blank between two word-like tokens,
/// between two operator tokens and after `)` before a word, nothing elsewhere. The result re-lexes to the same tokens.
pub fn join_tokens<'a>(tokens: impl IntoIterator<Item = (TokenKind, &'a str)>) -> String {
    let mut out = String::new();
    let mut prev: Option<TokenKind> = None;
    for (kind, text) in tokens {
        if let Some(p) = prev {
            let wordish = |k: TokenKind| {
                matches!(
                    k,
                    TokenKind::Ident
                        | TokenKind::Number
                        | TokenKind::Str
                        | TokenKind::Keyword(_)
                        | TokenKind::SetOp(_)
                )
            };
            let opish = |k: TokenKind| {
                matches!(k, TokenKind::Operator | TokenKind::Assign | TokenKind::Star)
            };
            if (wordish(p) && wordish(kind))
                || (opish(p) && opish(kind))
                || (p == TokenKind::RParen && wordish(kind))
            {
                out.push(' ');
            }
        }
        out.push_str(text);
        prev = Some(kind);
    }
    out
}

impl Condition {
    pub fn text(&self) -> String {
        join_tokens(self.tokens.iter().map(|t| (t.kind, t.text.as_str())))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.first)?;
        for (op, term) in &self.rest {
            f.write_str(op.symbol())?;
            // keeps `a - -1` from reading as a SQL line comment
            if matches!(term, Term::Number(n) if n.starts_with('-')) {
                f.write_str(" ")?;
            }
            write!(f, "{term}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Column(name) => write!(f, "{name}"),
            Term::Number(n) => f.write_str(n),
            Term::Str(s) => f.write_str(s),
            Term::TypeDecl(t) => f.write_str(t),
            Term::Star => f.write_str("*"),
            Term::Paren(inner) => write!(f, "({inner})"),
            Term::Call { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
