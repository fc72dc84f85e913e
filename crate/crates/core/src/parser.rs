//! Recursive-descent parser from logical lines to [`Script`].
//!
//! Lines are tokenized and regrouped into *rows*: a row is the token run of a
//! logical line, except that `{` and `}` always form rows of their own. Inside a
//! block the first two rows are the `TABLE` and `COMMAND` headers, then come
//! assignment rows, an optional nested `{...}` (UPDATE only), and clauses. A
//! row that does not start with a clause keyword continues the previous clause.

use std::collections::HashSet;

use crate::ast::*;
use crate::diag::{sort_diagnostics, Code, Diagnostic, Span};
use crate::lexer::{tokenize, Keyword, LogicalLine, Token, TokenKind};

/// Parsed script plus every diagnostic produced while parsing.
///
/// Blocks that failed to parse are left out of `script`; their errors are in
/// `diagnostics`.
#[derive(Debug, Clone)]
pub struct ParseOutput {
    pub script: Script,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseOutput {
    pub fn has_errors(&self) -> bool {
        crate::diag::has_errors(&self.diagnostics)
    }
}

type Row = Vec<Token>;
type PResult<T> = Result<T, Diagnostic>;

fn err(code: Code, span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(code, span, msg)
}

fn row_span(row: &[Token]) -> Span {
    match (row.first(), row.last()) {
        (Some(a), Some(b)) => a.span.to(b.span),
        _ => Span::default(),
    }
}

fn is_brace(row: &[Token], kind: TokenKind) -> bool {
    row.len() == 1 && row[0].kind == kind
}

fn leading_clause(row: &[Token]) -> Option<Keyword> {
    match row.first()?.kind {
        TokenKind::Keyword(k) if k.is_clause() => Some(k),
        _ => None,
    }
}

/// Parses a whole script. Lexical errors inside lines are reported as diagnostics too.
pub fn parse_script(lines: &[LogicalLine]) -> ParseOutput {
    let mut diagnostics = Vec::new();
    let mut rows: Vec<Row> = Vec::new();
    for line in lines {
        match tokenize(line) {
            Ok(tokens) => split_rows(tokens, &mut rows),
            Err(e) => diagnostics.push(Diagnostic::from(&e)),
        }
    }
    if !diagnostics.is_empty() {
        return ParseOutput {
            script: Script::default(),
            diagnostics,
        };
    }
    let script = parse_rows(&rows, &mut diagnostics);
    sort_diagnostics(&mut diagnostics);
    ParseOutput {
        script,
        diagnostics,
    }
}

/// Convenience wrapper: parse a single source text that is already comment-free.
pub fn parse_text(text: &str) -> Result<ParseOutput, crate::lexer::LexError> {
    let lines = crate::lexer::preprocess(&crate::lexer::RawSource::new("<text>", text))?;
    Ok(parse_script(&lines))
}

fn split_rows(tokens: Vec<Token>, rows: &mut Vec<Row>) {
    let mut cur = Vec::new();
    for tok in tokens {
        if matches!(tok.kind, TokenKind::LBrace | TokenKind::RBrace) {
            if !cur.is_empty() {
                rows.push(std::mem::take(&mut cur));
            }
            rows.push(vec![tok]);
        } else {
            cur.push(tok);
        }
    }
    if !cur.is_empty() {
        rows.push(cur);
    }
}

/// Index of the `}` row matching the `{` row at `open`.
fn matching_brace(rows: &[Row], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, row) in rows.iter().enumerate().skip(open) {
        if is_brace(row, TokenKind::LBrace) {
            depth += 1;
        } else if is_brace(row, TokenKind::RBrace) {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

fn check_braces(rows: &[Row]) -> PResult<()> {
    let mut open: Vec<Span> = Vec::new();
    for row in rows {
        if is_brace(row, TokenKind::LBrace) {
            open.push(row[0].span);
        } else if is_brace(row, TokenKind::RBrace) && open.pop().is_none() {
            return Err(err(
                Code::UnbalancedBraces,
                row[0].span,
                "'}' without a matching '{'",
            ));
        }
    }
    match open.pop() {
        Some(span) => Err(err(Code::UnbalancedBraces, span, "'{' is never closed")),
        None => Ok(()),
    }
}

fn parse_rows(rows: &[Row], diags: &mut Vec<Diagnostic>) -> Script {
    let mut script = Script::default();
    if let Err(d) = check_braces(rows) {
        diags.push(d);
        return script;
    }

    let mut current: Option<Chain> = None;
    let mut pending: Option<(SetOperator, Span)> = None;
    let mut i = 0;
    while i < rows.len() {
        let row = &rows[i];
        if is_brace(row, TokenKind::LBrace) {
            // balanced, checked above
            let close = matching_brace(rows, i).unwrap_or(rows.len() - 1);
            let span = row[0].span.to(rows[close][0].span);
            match parse_block(&rows[i + 1..close], span, diags) {
                Ok(block) => match (pending.take(), current.as_mut()) {
                    (Some((op, _)), Some(chain)) => {
                        chain.connectors.push(op);
                        chain.blocks.push(block);
                    }
                    _ => {
                        if let Some(done) = current.take() {
                            script.chains.push(done);
                        }
                        current = Some(Chain::single(block));
                    }
                },
                Err(d) => {
                    diags.push(d);
                    pending = None;
                }
            }
            i = close + 1;
            continue;
        }

        if let TokenKind::SetOp(op) = row[0].kind {
            if row.len() > 1 {
                diags.push(err(
                    Code::JunkBetweenBlocks,
                    row_span(&row[1..]),
                    format!("unexpected text after {}", op.as_str()),
                ));
            } else if pending.is_some() {
                diags.push(err(
                    Code::JunkBetweenBlocks,
                    row[0].span,
                    "two set operators in a row",
                ));
            } else if current.is_none() {
                diags.push(err(
                    Code::JunkBetweenBlocks,
                    row[0].span,
                    format!("{} before any block", op.as_str()),
                ));
            } else {
                pending = Some((op, row[0].span));
            }
        } else {
            diags.push(err(
                Code::JunkBetweenBlocks,
                row_span(row),
                "text outside of a '{ ... }' block",
            ));
        }
        i += 1;
    }

    if let Some((op, span)) = pending {
        diags.push(err(
            Code::TrailingSetOperator,
            span,
            format!("{} is not followed by a block", op.as_str()),
        ));
    }
    if let Some(done) = current {
        script.chains.push(done);
    }
    script
}

enum ResolvedCommand {
    /// INSERT_SELECT or INSERT_VALUES, decided by the FROM clause.
    Insert,
    Kind(CommandKind),
}

fn resolve_command(words: &[Token], header: &Token) -> PResult<ResolvedCommand> {
    use Keyword as K;
    let kws: Vec<Option<Keyword>> = words
        .iter()
        .map(|t| match t.kind {
            TokenKind::Keyword(k) => Some(k),
            _ => None,
        })
        .collect();
    let kind = match kws.as_slice() {
        [Some(K::Insert)] => return Ok(ResolvedCommand::Insert),
        [Some(K::Update)] => CommandKind::Update,
        [Some(K::Delete)] => CommandKind::Delete,
        [Some(K::Truncate)] | [Some(K::Truncate), Some(K::Table)] => CommandKind::Truncate,
        [Some(K::Create)] => CommandKind::CreateTableAs,
        [Some(K::Only), Some(K::Create)] => CommandKind::CreateTableBasic,
        [Some(K::Create), Some(K::View)] => CommandKind::CreateView,
        [Some(K::Create), Some(K::Index)] => CommandKind::CreateIndex,
        [Some(K::Drop)] | [Some(K::Drop), Some(K::Table)] => CommandKind::DropTable,
        [Some(K::Drop), Some(K::View)] => CommandKind::DropView,
        [] => {
            return Err(err(
                Code::MissingCommand,
                header.span,
                "COMMAND header names no command",
            ))
        }
        _ => {
            let text = words
                .iter()
                .map(|t| t.lexeme.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            return Err(err(
                Code::UnknownCommand,
                row_span(words),
                format!("unknown command '{text}'"),
            ));
        }
    };
    Ok(ResolvedCommand::Kind(kind))
}

fn colon_warning(tok: &Token, diags: &mut Vec<Diagnostic>) {
    if !tok.has_colon() {
        if let TokenKind::Keyword(k) = tok.kind {
            diags.push(Diagnostic::warning(
                Code::MissingColon,
                tok.span,
                format!("{} written without ':'", k.as_str()),
            ));
        }
    }
}

fn parse_block(rows: &[Row], span: Span, diags: &mut Vec<Diagnostic>) -> PResult<OperationBlock> {
    let table_row = rows
        .first()
        .filter(|r| r[0].is_keyword(Keyword::Table))
        .ok_or_else(|| {
            let at = rows.first().map(|r| r[0].span).unwrap_or(span);
            err(
                Code::MissingTable,
                at,
                "block must start with a TABLE header",
            )
        })?;
    colon_warning(&table_row[0], diags);
    if table_row.len() == 1 {
        return Err(err(
            Code::MissingTable,
            table_row[0].span,
            "TABLE header names no table",
        ));
    }
    let mut names = ExprParser::new(&table_row[1..]);
    let table = names.qualified_name()?;
    names.expect_end()?;

    let command_row = rows
        .get(1)
        .filter(|r| r[0].is_keyword(Keyword::Command))
        .ok_or_else(|| {
            let at = rows.get(1).map(|r| r[0].span).unwrap_or(table_row[0].span);
            err(
                Code::MissingCommand,
                at,
                "TABLE header must be followed by COMMAND",
            )
        })?;
    colon_warning(&command_row[0], diags);
    let resolved = resolve_command(&command_row[1..], &command_row[0])?;
    let provisional = match resolved {
        ResolvedCommand::Insert => CommandKind::InsertSelect,
        ResolvedCommand::Kind(k) => k,
    };

    let mut block = OperationBlock::new(table, provisional);
    block.span = span;
    let mut clauses: Vec<(Token, Vec<Token>)> = Vec::new();
    let mut seen: HashSet<Keyword> = HashSet::new();

    let mut i = 2;
    while i < rows.len() {
        let row = &rows[i];
        if is_brace(row, TokenKind::LBrace) {
            let close = matching_brace(rows, i).unwrap_or(rows.len() - 1);
            let inner_span = row[0].span.to(rows[close][0].span);
            if provisional != CommandKind::Update {
                return Err(err(
                    Code::NestedBlockOutsideUpdate,
                    row[0].span,
                    "a nested block is only allowed in an UPDATE",
                ));
            }
            if block.nested.is_some() {
                return Err(err(
                    Code::DuplicateClause,
                    row[0].span,
                    "UPDATE has more than one nested block",
                ));
            }
            if !clauses.is_empty() {
                return Err(err(
                    Code::UnexpectedToken,
                    row[0].span,
                    "the nested block must come before the clauses",
                ));
            }
            block.nested = Some(parse_nested(&rows[i + 1..close], inner_span, diags)?);
            i = close + 1;
            continue;
        }
        if is_brace(row, TokenKind::RBrace) {
            return Err(err(Code::UnbalancedBraces, row[0].span, "unexpected '}'"));
        }

        if let Some(kw) = leading_clause(row) {
            if !seen.insert(kw) {
                return Err(err(
                    Code::DuplicateClause,
                    row[0].span,
                    format!("{} appears more than once", kw.as_str()),
                ));
            }
            colon_warning(&row[0], diags);
            clauses.push((row[0].clone(), row[1..].to_vec()));
        } else if let Some((_, toks)) = clauses.last_mut() {
            toks.extend(row.iter().cloned());
        } else if row[0].is_keyword(Keyword::Same) {
            if block.same_marker || !block.assignments.is_empty() {
                return Err(err(
                    Code::SameWithAssignments,
                    row_span(row),
                    "SAME cannot be combined with other select items",
                ));
            }
            parse_same(row, diags)?;
            block.same_marker = true;
        } else {
            if block.same_marker {
                return Err(err(
                    Code::SameWithAssignments,
                    row_span(row),
                    "SAME cannot be combined with other select items",
                ));
            }
            let first = block.assignments.is_empty();
            let a = parse_assignment(row, first, provisional, diags)?;
            block.assignments.push(a);
        }
        i += 1;
    }

    for (kw_tok, toks) in clauses {
        let TokenKind::Keyword(kw) = kw_tok.kind else {
            continue;
        };
        match parse_clause(kw, &kw_tok, &toks)? {
            Clause::From(refs) => block.from = refs,
            Clause::Where(c) => block.filter = c,
            Clause::Having(c) => block.having = c,
            Clause::GroupBy(g) => block.group_by = g,
            Clause::OrderBy(o) => block.order_by = o,
        }
    }

    if let ResolvedCommand::Insert = resolved {
        block.command = if block.from.is_empty() {
            CommandKind::InsertValues
        } else {
            CommandKind::InsertSelect
        };
    }
    Ok(block)
}

fn parse_same(row: &[Token], diags: &mut Vec<Diagnostic>) -> PResult<()> {
    let ok = row.len() == 3
        && row[0].is_keyword(Keyword::Same)
        && row[1].kind == TokenKind::Assign
        && row[2].is_keyword(Keyword::Same);
    if !ok {
        return Err(err(
            Code::UnexpectedToken,
            row_span(row),
            "expected 'SAME:==SAME:'",
        ));
    }
    if row[1].lexeme == "=" {
        diags.push(single_equals(&row[1]));
    }
    Ok(())
}

fn single_equals(tok: &Token) -> Diagnostic {
    Diagnostic::warning(
        Code::SingleEquals,
        tok.span,
        "'=' used as assignment; '==' is the canonical form",
    )
}

fn parse_nested(rows: &[Row], span: Span, diags: &mut Vec<Diagnostic>) -> PResult<NestedSelect> {
    let mut nested = NestedSelect {
        items: Vec::new(),
        from: Vec::new(),
        filter: Vec::new(),
    };
    let mut clauses: Vec<(Token, Vec<Token>)> = Vec::new();
    let mut seen = HashSet::new();
    for row in rows {
        if row[0].kind == TokenKind::LBrace || row[0].kind == TokenKind::RBrace {
            return Err(err(
                Code::UnexpectedToken,
                row[0].span,
                "nested blocks cannot contain further blocks",
            ));
        }
        if let Some(kw) = leading_clause(row) {
            if !matches!(kw, Keyword::From | Keyword::Where) {
                return Err(err(
                    Code::ClauseNotAllowed,
                    row[0].span,
                    format!("{} is not allowed in a nested UPDATE select", kw.as_str()),
                ));
            }
            if !seen.insert(kw) {
                return Err(err(
                    Code::DuplicateClause,
                    row[0].span,
                    format!("{} appears more than once", kw.as_str()),
                ));
            }
            colon_warning(&row[0], diags);
            clauses.push((row[0].clone(), row[1..].to_vec()));
        } else if let Some((_, toks)) = clauses.last_mut() {
            toks.extend(row.iter().cloned());
        } else {
            let first = nested.items.is_empty();
            let item = parse_assignment(row, first, CommandKind::Update, diags)?;
            nested.items.push(item);
        }
    }
    if nested.items.is_empty() {
        return Err(err(
            Code::EmptyAssignments,
            span,
            "nested UPDATE select has no items",
        ));
    }
    for (kw_tok, toks) in clauses {
        let TokenKind::Keyword(kw) = kw_tok.kind else {
            continue;
        };
        match parse_clause(kw, &kw_tok, &toks)? {
            Clause::From(refs) => nested.from = refs,
            Clause::Where(c) => nested.filter = c,
            _ => unreachable!("only FROM and WHERE reach here"),
        }
    }
    Ok(nested)
}

/// Parses `target == [DISTINCT] expression [alias]`.
pub fn parse_assignment(
    row: &[Token],
    is_first: bool,
    command: CommandKind,
    diags: &mut Vec<Diagnostic>,
) -> PResult<Assignment> {
    let mut depth = 0i32;
    let assign_at = row.iter().position(|t| {
        match t.kind {
            TokenKind::LParen => depth += 1,
            TokenKind::RParen => depth -= 1,
            _ => {}
        }
        depth == 0 && t.kind == TokenKind::Assign
    });
    let Some(at) = assign_at else {
        let dots = row
            .windows(3)
            .any(|w| w.iter().all(|t| t.kind == TokenKind::Dot));
        let msg = if dots {
            "'...' rows are elisions in examples, not syntax"
        } else {
            "expected 'target == expression'"
        };
        return Err(err(Code::ExpectedAssignment, row_span(row), msg));
    };
    let assign_tok = &row[at];
    if assign_tok.lexeme == "=" {
        diags.push(single_equals(assign_tok));
    }

    let lhs = &row[..at];
    let target = match lhs {
        [t] if t.kind == TokenKind::Star => Target::Wildcard,
        [] => {
            return Err(err(
                Code::InvalidTarget,
                assign_tok.span,
                "assignment has no target",
            ))
        }
        _ => {
            let mut p = ExprParser::new(lhs);
            let name = p.qualified_name().map_err(|d| {
                err(
                    Code::InvalidTarget,
                    d.span,
                    "target must be a column name or '*'",
                )
            })?;
            if !p.at_end() {
                return Err(err(
                    Code::InvalidTarget,
                    row_span(lhs),
                    "target must be a column name or '*'",
                ));
            }
            Target::Column(name)
        }
    };

    let mut rhs = &row[at + 1..];
    let mut distinct = false;
    if let Some(first) = rhs.first() {
        if first.is_keyword(Keyword::Distinct) {
            if !is_first {
                return Err(err(
                    Code::DistinctNotFirst,
                    first.span,
                    "DISTINCT is only allowed on the first item",
                ));
            }
            distinct = true;
            rhs = &rhs[1..];
        }
    }
    if rhs.is_empty() {
        return Err(err(
            Code::EmptyExpression,
            assign_tok.span,
            "assignment has no expression",
        ));
    }

    if command == CommandKind::CreateTableBasic {
        let text = join_tokens(rhs.iter().map(|t| (t.kind, t.lexeme.as_str())));
        return Ok(Assignment {
            target,
            expr: Expression::term(Term::TypeDecl(text)),
            alias: None,
            distinct,
        });
    }

    let mut p = ExprParser::new(rhs);
    let expr = p.expression()?;
    let rest = p.remaining();
    let alias = match rest {
        [] => None,
        [t] if t.kind == TokenKind::Ident => Some(t.lexeme.clone()),
        _ if rest.iter().all(|t| t.kind == TokenKind::Ident) => {
            return Err(err(
                Code::MultipleAliases,
                row_span(rest),
                "more than one alias after the expression",
            ))
        }
        _ => return Err(unexpected(&rest[0])),
    };
    Ok(Assignment {
        target,
        expr,
        alias,
        distinct,
    })
}

fn unexpected(tok: &Token) -> Diagnostic {
    let code = if tok.kind == TokenKind::RParen {
        Code::UnbalancedParens
    } else {
        Code::UnexpectedToken
    };
    err(code, tok.span, format!("unexpected '{}'", tok.lexeme))
}

enum Clause {
    From(Vec<TableRef>),
    Where(Vec<Condition>),
    Having(Vec<Condition>),
    GroupBy(Vec<Expression>),
    OrderBy(Vec<OrderItem>),
}

/// Splits on commas outside parentheses.
fn split_top_level<'t>(toks: &'t [Token], kw: &Token) -> PResult<Vec<&'t [Token]>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t.kind {
            TokenKind::LParen => depth += 1,
            TokenKind::RParen => {
                depth -= 1;
                if depth < 0 {
                    return Err(err(Code::UnbalancedParens, t.span, "unmatched ')'"));
                }
            }
            TokenKind::Comma if depth == 0 => {
                parts.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        let open = toks
            .iter()
            .rev()
            .find(|t| t.kind == TokenKind::LParen)
            .map(|t| t.span)
            .unwrap_or(kw.span);
        return Err(err(Code::UnbalancedParens, open, "unmatched '('"));
    }
    parts.push(&toks[start..]);
    for (i, p) in parts.iter().enumerate() {
        if p.is_empty() {
            let at = if i == 0 {
                kw.span
            } else {
                row_span(parts[i - 1])
            };
            return Err(err(
                Code::EmptyClause,
                at,
                format!("empty item in {}", kw.lexeme.trim_end_matches(':').trim()),
            ));
        }
    }
    Ok(parts)
}

fn parse_clause(kw: Keyword, kw_tok: &Token, toks: &[Token]) -> PResult<Clause> {
    if toks.is_empty() {
        return Err(err(
            Code::EmptyClause,
            kw_tok.span,
            format!("{} clause is empty", kw.as_str()),
        ));
    }
    let parts = split_top_level(toks, kw_tok)?;
    Ok(match kw {
        Keyword::From => Clause::From(
            parts
                .into_iter()
                .map(parse_table_ref)
                .collect::<PResult<_>>()?,
        ),
        Keyword::Where | Keyword::Having => {
            let conds = parts
                .into_iter()
                .map(|p| Condition {
                    tokens: p
                        .iter()
                        .map(|t| CondToken {
                            kind: t.kind,
                            text: t.lexeme.clone(),
                        })
                        .collect(),
                })
                .collect();
            if kw == Keyword::Where {
                Clause::Where(conds)
            } else {
                Clause::Having(conds)
            }
        }
        Keyword::GroupBy => Clause::GroupBy(
            parts
                .into_iter()
                .map(|p| {
                    let mut ep = ExprParser::new(p);
                    let e = ep.expression()?;
                    ep.expect_end()?;
                    Ok(e)
                })
                .collect::<PResult<_>>()?,
        ),
        Keyword::OrderBy => Clause::OrderBy(
            parts
                .into_iter()
                .map(|p| {
                    let mut ep = ExprParser::new(p);
                    let expr = ep.expression()?;
                    let direction = match ep.remaining() {
                        [] => None,
                        [t] if t.kind == TokenKind::Ident
                            && t.lexeme.eq_ignore_ascii_case("asc") =>
                        {
                            Some(Direction::Asc)
                        }
                        [t] if t.kind == TokenKind::Ident
                            && t.lexeme.eq_ignore_ascii_case("desc") =>
                        {
                            Some(Direction::Desc)
                        }
                        rest => return Err(unexpected(&rest[0])),
                    };
                    Ok(OrderItem { expr, direction })
                })
                .collect::<PResult<_>>()?,
        ),
        other => unreachable!("{other:?} is not a clause keyword"),
    })
}

fn parse_table_ref(toks: &[Token]) -> PResult<TableRef> {
    let mut p = ExprParser::new(toks);
    let name = p
        .qualified_name()
        .map_err(|d| err(Code::InvalidTableRef, d.span, "expected a table name"))?;
    let alias = match p.remaining() {
        [] => None,
        [t] if t.kind == TokenKind::Ident => Some(t.lexeme.clone()),
        rest => {
            return Err(err(
                Code::InvalidTableRef,
                row_span(rest),
                "expected 'table [alias]'",
            ))
        }
    };
    Ok(TableRef { name, alias })
}

/// Parses flat arithmetic chains over a token slice.
struct ExprParser<'t> {
    toks: &'t [Token],
    pos: usize,
}

impl<'t> ExprParser<'t> {
    fn new(toks: &'t [Token]) -> Self {
        ExprParser { toks, pos: 0 }
    }

    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn peek_kind(&self, ahead: usize) -> Option<TokenKind> {
        self.toks.get(self.pos + ahead).map(|t| t.kind)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn remaining(&self) -> &'t [Token] {
        &self.toks[self.pos.min(self.toks.len())..]
    }

    fn end_span(&self) -> Span {
        self.toks.last().map(|t| t.span).unwrap_or_default()
    }

    fn expect_end(&self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(unexpected(t)),
        }
    }

    fn qualified_name(&mut self) -> PResult<QualifiedName> {
        let mut parts = Vec::new();
        loop {
            match self.peek() {
                Some(t) if t.kind == TokenKind::Ident => {
                    parts.push(t.lexeme.clone());
                    self.pos += 1;
                }
                Some(t) => return Err(unexpected(t)),
                None => {
                    return Err(err(
                        Code::UnexpectedToken,
                        self.end_span(),
                        "expected a name",
                    ))
                }
            }
            if self.peek_kind(0) == Some(TokenKind::Dot) {
                self.pos += 1;
            } else {
                return Ok(QualifiedName(parts));
            }
        }
    }

    fn arith_op(&self) -> Option<ArithOp> {
        let t = self.peek()?;
        match t.kind {
            TokenKind::Star => Some(ArithOp::Mul),
            TokenKind::Operator => match t.lexeme.as_str() {
                "+" => Some(ArithOp::Add),
                "-" => Some(ArithOp::Sub),
                "/" => Some(ArithOp::Div),
                _ => None,
            },
            _ => None,
        }
    }

    fn starts_term(&self) -> bool {
        match self.peek_kind(0) {
            Some(
                TokenKind::Number
                | TokenKind::Str
                | TokenKind::Star
                | TokenKind::LParen
                | TokenKind::Ident,
            ) => true,
            Some(TokenKind::Operator) => {
                self.peek().is_some_and(|t| t.lexeme == "-")
                    && self.peek_kind(1) == Some(TokenKind::Number)
            }
            _ => false,
        }
    }

    fn expression(&mut self) -> PResult<Expression> {
        if self.at_end() {
            return Err(err(
                Code::EmptyExpression,
                self.end_span(),
                "expected an expression",
            ));
        }
        let first = self.term()?;
        let mut rest = Vec::new();
        while let Some(op) = self.arith_op() {
            let op_tok = &self.toks[self.pos];
            self.pos += 1;
            if !self.starts_term() {
                return Err(err(
                    Code::DanglingOperator,
                    op_tok.span,
                    format!("operator '{}' has no right operand", op_tok.lexeme),
                ));
            }
            let t = self.term()?;
            rest.push((op, t));
        }
        let expr = Expression { first, rest };
        if !expr.rest.is_empty()
            && (expr.first == Term::Star || expr.rest.iter().any(|(_, t)| *t == Term::Star))
        {
            return Err(err(
                Code::UnexpectedToken,
                self.end_span(),
                "'*' cannot be combined with operators",
            ));
        }
        Ok(expr)
    }

    fn term(&mut self) -> PResult<Term> {
        let Some(tok) = self.peek() else {
            return Err(err(
                Code::EmptyExpression,
                self.end_span(),
                "expected a term",
            ));
        };
        match tok.kind {
            TokenKind::Number => {
                self.pos += 1;
                Ok(Term::Number(tok.lexeme.clone()))
            }
            TokenKind::Operator
                if tok.lexeme == "-" && self.peek_kind(1) == Some(TokenKind::Number) =>
            {
                let n = &self.toks[self.pos + 1];
                self.pos += 2;
                Ok(Term::Number(format!("-{}", n.lexeme)))
            }
            TokenKind::Str => {
                self.pos += 1;
                Ok(Term::Str(tok.lexeme.clone()))
            }
            TokenKind::Star => {
                self.pos += 1;
                Ok(Term::Star)
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.expression()?;
                match self.peek() {
                    Some(t) if t.kind == TokenKind::RParen => {
                        self.pos += 1;
                        Ok(Term::Paren(Box::new(inner)))
                    }
                    Some(t) => Err(unexpected(t)),
                    None => Err(err(Code::UnbalancedParens, tok.span, "unmatched '('")),
                }
            }
            TokenKind::Ident => {
                let name = self.qualified_name()?;
                if self.peek_kind(0) != Some(TokenKind::LParen) {
                    return Ok(Term::Column(name));
                }
                let open = self.toks[self.pos].span;
                self.pos += 1;
                let mut args = Vec::new();
                if self.peek_kind(0) == Some(TokenKind::RParen) {
                    self.pos += 1;
                    return Ok(Term::Call {
                        name: name.to_string(),
                        args,
                    });
                }
                loop {
                    args.push(self.expression()?);
                    match self.peek() {
                        Some(t) if t.kind == TokenKind::Comma => self.pos += 1,
                        Some(t) if t.kind == TokenKind::RParen => {
                            self.pos += 1;
                            return Ok(Term::Call {
                                name: name.to_string(),
                                args,
                            });
                        }
                        Some(t) => return Err(unexpected(t)),
                        None => return Err(err(Code::UnbalancedParens, open, "unmatched '('")),
                    }
                }
            }
            _ => Err(unexpected(tok)),
        }
    }
}
