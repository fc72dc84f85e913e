//! SQL generation for validated, normalized scripts.

use std::fmt;

use thiserror::Error;

use crate::ast::*;
use crate::diag::{Code, Diagnostic, Span};
use crate::lexer::TokenKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Dialect {
    /// MINUS and `truncate table`.
    OracleStyle,
    /// EXCEPT, and `delete from` when truncate is unavailable.
    #[default]
    Portable,
}

impl Dialect {
    pub fn parse(s: &str) -> Option<Dialect> {
        match s.to_ascii_lowercase().as_str() {
            "oracle" | "oracle_style" | "oracle-style" => Some(Dialect::OracleStyle),
            "portable" => Some(Dialect::Portable),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Dialect::OracleStyle => "oracle",
            Dialect::Portable => "portable",
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One generated statement, without a terminator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqlStatement {
    pub text: String,
    pub source_span: Span,
    pub kind: CommandKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("ORDER BY is only allowed on the last block of a chain")]
    OrderByInNonFinalBlock { span: Span },
    #[error("{what} cannot be emitted for the {dialect} dialect")]
    UnsupportedInDialect {
        what: String,
        dialect: Dialect,
        span: Span,
    },
    #[error("{kind} cannot be combined with a set operator")]
    NotAQuery { kind: CommandKind, span: Span },
}

impl EmitError {
    pub fn span(&self) -> Span {
        match self {
            EmitError::OrderByInNonFinalBlock { span }
            | EmitError::UnsupportedInDialect { span, .. }
            | EmitError::NotAQuery { span, .. } => *span,
        }
    }
}

impl From<&EmitError> for Diagnostic {
    fn from(e: &EmitError) -> Self {
        let code = match e {
            EmitError::OrderByInNonFinalBlock { .. } => Code::OrderByInNonFinalBlock,
            EmitError::NotAQuery { .. } => Code::InvalidChainCommand,
            EmitError::UnsupportedInDialect { .. } => Code::InvalidChainCommand,
        };
        Diagnostic::error(code, e.span(), e.to_string())
    }
}

pub fn render_expression(e: &Expression) -> String {
    e.to_string()
}

fn render_condition(c: &Condition) -> String {
    join_tokens(c.tokens.iter().map(|t| {
        let text = match t.kind {
            TokenKind::Assign => "=",
            TokenKind::Keyword(_) | TokenKind::SetOp(_) => t.text.trim_end_matches(':').trim_end(),
            _ => t.text.as_str(),
        };
        (t.kind, text)
    }))
}

fn render_conditions(conds: &[Condition]) -> String {
    conds
        .iter()
        .map(render_condition)
        .collect::<Vec<_>>()
        .join(" AND ")
}

fn render_from(from: &[TableRef]) -> String {
    from.iter()
        .map(|r| match &r.alias {
            Some(a) => format!("{} {}", r.name, a),
            None => r.name.to_string(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn column_list(assignments: &[Assignment]) -> Option<String> {
    let names: Vec<String> = assignments
        .iter()
        .filter_map(|a| match &a.target {
            Target::Column(n) => Some(n.to_string()),
            Target::Wildcard => None,
        })
        .collect();
    (!names.is_empty()).then(|| format!("({})", names.join(",")))
}

/// `select` item: expression plus alias. Views and `create ... as` tables take
/// their column names from the targets, so an implicit alias is added there.
fn render_item(a: &Assignment, name_from_target: bool) -> String {
    let expr = render_expression(&a.expr);
    let alias = match (&a.alias, &a.target) {
        (Some(alias), _) => Some(alias.clone()),
        (None, Target::Column(t)) if name_from_target => match a.expr.as_column() {
            Some(c) if c.last().eq_ignore_ascii_case(t.last()) => None,
            _ => Some(t.last().to_string()),
        },
        _ => None,
    };
    match alias {
        Some(al) => format!("{expr} {al}"),
        None => expr,
    }
}

fn select_list(items: &[Assignment], name_from_target: bool) -> String {
    let distinct = items.first().is_some_and(|a| a.distinct);
    let list: Vec<String> = items
        .iter()
        .map(|a| render_item(a, name_from_target))
        .collect();
    format!(
        "select {}{}",
        if distinct { "distinct " } else { "" },
        list.join(",")
    )
}

/// Generates SQL for one dialect.
#[derive(Debug, Clone, Copy)]
pub struct Emitter {
    pub dialect: Dialect,
    /// Whether `truncate table` may be emitted under the portable dialect.
    pub truncate_supported: bool,
    /// Put each clause on its own line.
    pub pretty: bool,
}

impl Emitter {
    pub fn new(dialect: Dialect) -> Self {
        Emitter {
            dialect,
            truncate_supported: dialect == Dialect::OracleStyle,
            pretty: false,
        }
    }

    pub fn pretty(mut self, on: bool) -> Self {
        self.pretty = on;
        self
    }

    pub fn truncate_supported(mut self, on: bool) -> Self {
        self.truncate_supported = on;
        self
    }

    fn join(&self, parts: Vec<String>) -> String {
        parts.join(if self.pretty { "\n" } else { " " })
    }

    /// `select ... from ... [where] [group by] [having] [order by]`.
    pub fn emit_query_body(&self, block: &OperationBlock) -> String {
        let name_from_target = matches!(
            block.command,
            CommandKind::CreateView | CommandKind::CreateTableAs
        );
        let mut parts = vec![select_list(&block.assignments, name_from_target)];
        if !block.from.is_empty() {
            parts.push(format!("from {}", render_from(&block.from)));
        }
        if !block.filter.is_empty() {
            parts.push(format!("where {}", render_conditions(&block.filter)));
        }
        if !block.group_by.is_empty() {
            let items: Vec<String> = block.group_by.iter().map(render_expression).collect();
            parts.push(format!("group by {}", items.join(",")));
        }
        if !block.having.is_empty() {
            parts.push(format!("having {}", render_conditions(&block.having)));
        }
        if !block.order_by.is_empty() {
            let items: Vec<String> = block
                .order_by
                .iter()
                .map(|o| match o.direction {
                    None => render_expression(&o.expr),
                    Some(Direction::Asc) => format!("{} asc", render_expression(&o.expr)),
                    Some(Direction::Desc) => format!("{} desc", render_expression(&o.expr)),
                })
                .collect();
            parts.push(format!("order by {}", items.join(",")));
        }
        self.join(parts)
    }

    /// Statement head placed in front of a query body, for the query family.
    fn query_prefix(&self, block: &OperationBlock) -> Option<String> {
        match block.command {
            CommandKind::InsertSelect => Some(format!(
                "insert into {}{}",
                block.table,
                column_list(&block.assignments).unwrap_or_default()
            )),
            CommandKind::CreateView => Some(format!("create view {} as", block.table)),
            CommandKind::CreateTableAs => Some(format!("create table {} as", block.table)),
            _ => None,
        }
    }

    fn where_suffix(&self, filter: &[Condition]) -> Option<String> {
        (!filter.is_empty()).then(|| format!("where {}", render_conditions(filter)))
    }

    pub fn emit_statement(&self, block: &OperationBlock) -> Result<SqlStatement, EmitError> {
        let t = &block.table;
        let text = match block.command {
            CommandKind::InsertSelect | CommandKind::CreateView | CommandKind::CreateTableAs => {
                let prefix = self.query_prefix(block).unwrap_or_default();
                self.join(vec![prefix, self.emit_query_body(block)])
            }
            CommandKind::InsertValues => {
                let values: Vec<String> = block
                    .assignments
                    .iter()
                    .map(|a| render_expression(&a.expr))
                    .collect();
                format!(
                    "insert into {t}{} values({})",
                    column_list(&block.assignments).unwrap_or_default(),
                    values.join(",")
                )
            }
            CommandKind::Update => self.emit_update(block),
            CommandKind::Delete => {
                let mut parts = vec![format!("delete from {t}")];
                // normalization leaves FROM only when it carries an alias
                if let Some(alias) = block.from.first().and_then(|r| r.alias.as_ref()) {
                    parts[0] = format!("delete from {t} {alias}");
                }
                parts.extend(self.where_suffix(&block.filter));
                self.join(parts)
            }
            CommandKind::Truncate => {
                if self.dialect == Dialect::OracleStyle || self.truncate_supported {
                    format!("truncate table {t}")
                } else {
                    format!("delete from {t}")
                }
            }
            CommandKind::CreateTableBasic => {
                let cols: Vec<String> = block
                    .assignments
                    .iter()
                    .map(|a| {
                        let name = match &a.target {
                            Target::Column(n) => n.to_string(),
                            Target::Wildcard => "*".to_string(),
                        };
                        format!("{name} {}", render_expression(&a.expr))
                    })
                    .collect();
                format!("create table {t}({})", cols.join(","))
            }
            CommandKind::DropTable => format!("drop table {t}"),
            CommandKind::DropView => format!("drop view {t}"),
            CommandKind::CreateIndex => {
                let on = match block.assignments.first().map(|a| &a.target) {
                    Some(Target::Column(n)) => n.to_string(),
                    _ => String::new(),
                };
                let cols: Vec<String> = block
                    .assignments
                    .iter()
                    .map(|a| render_expression(&a.expr))
                    .collect();
                format!("create index {t} on {on}({})", cols.join(","))
            }
        };
        Ok(SqlStatement {
            text,
            source_span: block.span,
            kind: block.command,
        })
    }

    fn emit_update(&self, block: &OperationBlock) -> String {
        let t = &block.table;
        let mut parts = Vec::new();
        match &block.nested {
            None => {
                let sets: Vec<String> = block
                    .assignments
                    .iter()
                    .map(|a| {
                        let target = match &a.target {
                            Target::Column(n) => n.to_string(),
                            Target::Wildcard => "*".to_string(),
                        };
                        format!("{target}={}", render_expression(&a.expr))
                    })
                    .collect();
                parts.push(format!("update {t} set {}", sets.join(",")));
            }
            Some(nested) => {
                let source = if block.assignments.is_empty() {
                    &nested.items
                } else {
                    &block.assignments
                };
                let targets = column_list(source).unwrap_or_default();
                let mut sub = vec![select_list(&nested.items, false)];
                if !nested.from.is_empty() {
                    sub.push(format!("from {}", render_from(&nested.from)));
                }
                sub.extend(self.where_suffix(&nested.filter));
                parts.push(format!("update {t} set {targets} = ({})", self.join(sub)));
            }
        }
        parts.extend(self.where_suffix(&block.filter));
        self.join(parts)
    }

    fn connector(&self, op: SetOperator) -> &'static str {
        match (op, self.dialect) {
            (SetOperator::Union, _) => "union",
            (SetOperator::Intersect, _) => "intersect",
            (SetOperator::Minus, Dialect::OracleStyle) => "minus",
            (SetOperator::Minus, Dialect::Portable) => "except",
        }
    }

    /// One statement per chain; the statement head comes from the first block.
    pub fn emit_chain(&self, chain: &Chain) -> Result<SqlStatement, EmitError> {
        let first = &chain.blocks[0];
        if chain.blocks.len() == 1 {
            return self.emit_statement(first);
        }
        let last = chain.blocks.len() - 1;
        let mut parts = Vec::new();
        match self.query_prefix(first) {
            Some(prefix) => parts.push(prefix),
            None => {
                return Err(EmitError::NotAQuery {
                    kind: first.command,
                    span: first.span,
                })
            }
        }
        for (i, block) in chain.blocks.iter().enumerate() {
            if i < last && !block.order_by.is_empty() {
                return Err(EmitError::OrderByInNonFinalBlock { span: block.span });
            }
            if i > 0 {
                parts.push(self.connector(chain.connectors[i - 1]).to_string());
            }
            parts.push(self.emit_query_body(block));
        }
        Ok(SqlStatement {
            text: self.join(parts),
            source_span: first.span.to(chain.blocks[last].span),
            kind: first.command,
        })
    }

    /// Statements in source order, one per chain.
    pub fn emit_script(&self, script: &Script) -> Result<Vec<SqlStatement>, EmitError> {
        script.chains.iter().map(|c| self.emit_chain(c)).collect()
    }
}

/// Batch text: one statement per line, or blank-line separated when pretty.
pub fn render_batch(statements: &[SqlStatement], terminator: bool, pretty: bool) -> String {
    let mut out = String::new();
    for (i, s) in statements.iter().enumerate() {
        if pretty && i > 0 {
            out.push('\n');
        }
        out.push_str(&s.text);
        if terminator {
            out.push(';');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::{expand_same, normalize};
    use crate::parser::parse_text;

    fn emit(src: &str, dialect: Dialect) -> Vec<String> {
        let parsed = parse_text(src).unwrap();
        assert!(!parsed.has_errors(), "{:?}", parsed.diagnostics);
        let s = normalize(&expand_same(&parsed.script).unwrap());
        Emitter::new(dialect)
            .emit_script(&s)
            .unwrap()
            .into_iter()
            .map(|s| s.text)
            .collect()
    }

    #[test]
    fn simple_forms() {
        let cases = [
            ("{TABLE: t\nCOMMAND: truncate\n}", "truncate table t"),
            ("{TABLE: t\nCOMMAND: drop\n}", "drop table t"),
            ("{TABLE: v\nCOMMAND: drop view\n}", "drop view v"),
            (
                "{TABLE: ix\nCOMMAND: create index\nt==c1\nt==c2\n}",
                "create index ix on t(c1,c2)",
            ),
            (
                "{TABLE: t\nCOMMAND: insert\na==1\nb=='x'\n}",
                "insert into t(a,b) values(1,'x')",
            ),
            (
                "{TABLE: t\nCOMMAND: update\na==a+1\nb==0\nWHERE: k>1, k<5\n}",
                "update t set a=a+1,b=0 where k>1 AND k<5",
            ),
            (
                "{TABLE: t\nCOMMAND: only create\nid==NUMBER\nname==VARCHAR(20)\n}",
                "create table t(id NUMBER,name VARCHAR(20))",
            ),
        ];
        for (src, want) in cases {
            assert_eq!(
                emit(src, Dialect::OracleStyle),
                vec![want.to_string()],
                "{src}"
            );
        }
    }

    #[test]
    fn nested_update() {
        let src = "{TABLE: t\nCOMMAND: update\n{\na==s.x\nb==s.y*2\nFROM: s\nWHERE: s.id=t.id\n}\nWHERE: t.k=1\n}";
        assert_eq!(
            emit(src, Dialect::Portable),
            vec!["update t set (a,b) = (select s.x,s.y*2 from s where s.id=t.id) where t.k=1"]
        );
    }

    #[test]
    fn views_name_their_columns() {
        let src = "{TABLE: v\nCOMMAND: create view\na==a\nb==x+1\nc==y c2\nFROM: s\n}";
        assert_eq!(
            emit(src, Dialect::Portable),
            vec!["create view v as select a,x+1 b,y c2 from s"]
        );
    }

    #[test]
    fn dialects_differ_in_connector_and_truncate() {
        let src = "{TABLE: g\nCOMMAND: insert\na==x\nFROM: s\n}\nMINUS\n{TABLE: g\nCOMMAND: insert\nSAME:==SAME:\nFROM: u\n}\n{TABLE: g\nCOMMAND: truncate\n}";
        assert_eq!(
            emit(src, Dialect::OracleStyle),
            vec![
                "insert into g(a) select x from s minus select x from u",
                "truncate table g"
            ]
        );
        assert_eq!(
            emit(src, Dialect::Portable),
            vec![
                "insert into g(a) select x from s except select x from u",
                "delete from g"
            ]
        );
    }

    #[test]
    fn order_by_only_last() {
        let src = "{TABLE: g\nCOMMAND: insert\na==x\nFROM: s\nORDER BY: x\n}\nUNION\n{TABLE: g\nCOMMAND: insert\na==x\nFROM: u\n}";
        let s = parse_text(src).unwrap().script;
        let err = Emitter::new(Dialect::Portable).emit_script(&s).unwrap_err();
        assert!(matches!(err, EmitError::OrderByInNonFinalBlock { .. }));
    }

    #[test]
    fn pretty_splits_clauses() {
        let src = "{TABLE: t\nCOMMAND: create\na==x\nFROM: s\nWHERE: x>1\n}";
        let s = parse_text(src).unwrap().script;
        let st = Emitter::new(Dialect::Portable)
            .pretty(true)
            .emit_script(&s)
            .unwrap();
        assert_eq!(
            st[0].text,
            "create table t as\nselect x a\nfrom s\nwhere x>1"
        );
    }
}
