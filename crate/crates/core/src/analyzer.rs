//! SAME expansion, validation and normalization of parsed scripts.

use crate::ast::*;
use crate::diag::{sort_diagnostics, Code, Diagnostic};

/// Replaces every `SAME:==SAME:` select list with a deep copy of the first
/// block's assignments in the same chain.
pub fn expand_same(script: &Script) -> Result<Script, Vec<Diagnostic>> {
    let mut errors = Vec::new();
    let mut out = script.clone();
    for chain in &mut out.chains {
        if chain.blocks.len() == 1 {
            if chain.blocks[0].same_marker {
                errors.push(Diagnostic::error(
                    Code::SameOutsideChain,
                    chain.blocks[0].span,
                    "SAME needs a preceding block joined by a set operator",
                ));
            }
            continue;
        }
        if chain.blocks[0].same_marker {
            errors.push(Diagnostic::error(
                Code::SameInFirstBlock,
                chain.blocks[0].span,
                "the first block of a chain cannot use SAME",
            ));
            continue;
        }
        let template = chain.blocks[0].assignments.clone();
        for block in chain.blocks.iter_mut().skip(1) {
            if block.same_marker {
                block.assignments = template.clone();
                block.same_marker = false;
            }
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        sort_diagnostics(&mut errors);
        Err(errors)
    }
}

/// Checks a SAME-expanded script. Diagnostics come back sorted by position.
pub fn validate(script: &Script) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for chain in &script.chains {
        for block in &chain.blocks {
            validate_block(block, &mut diags);
        }
        if chain.blocks.len() > 1 {
            validate_chain(chain, &mut diags);
        }
    }
    sort_diagnostics(&mut diags);
    diags
}

fn validate_block(b: &OperationBlock, diags: &mut Vec<Diagnostic>) {
    let kind = b.command;

    let allows_query_clauses = kind.is_query_family();
    let clause_present = [
        ("FROM", !b.from.is_empty()),
        ("WHERE", !b.filter.is_empty()),
        ("GROUP BY", !b.group_by.is_empty()),
        ("HAVING", !b.having.is_empty()),
        ("ORDER BY", !b.order_by.is_empty()),
    ];
    if kind == CommandKind::InsertValues {
        if b.has_clauses() {
            block_error(
                diags,
                b,
                Code::ValuesWithClauses,
                "INSERT without FROM takes literal values and no clauses",
            );
        }
    } else if !allows_query_clauses {
        let allowed: &[&str] = match kind {
            CommandKind::Update => &["WHERE"],
            CommandKind::Delete => &["FROM", "WHERE"],
            _ => &[],
        };
        for (name, present) in clause_present {
            if present && !allowed.contains(&name) {
                block_error(
                    diags,
                    b,
                    Code::ClauseNotAllowed,
                    format!("{name} is not allowed for {kind}"),
                );
            }
        }
    }

    let no_assignments = matches!(
        kind,
        CommandKind::Delete
            | CommandKind::Truncate
            | CommandKind::DropTable
            | CommandKind::DropView
    );
    if no_assignments {
        if !b.assignments.is_empty() {
            block_error(
                diags,
                b,
                Code::AssignmentsNotAllowed,
                format!("{kind} takes no assignments"),
            );
        }
    } else if b.assignments.is_empty() && b.nested.is_none() {
        block_error(
            diags,
            b,
            Code::EmptyAssignments,
            format!("{kind} needs at least one assignment"),
        );
    }

    let wildcards = b
        .assignments
        .iter()
        .filter(|a| a.target == Target::Wildcard)
        .count();
    if wildcards > 0 && wildcards < b.assignments.len() {
        block_error(
            diags,
            b,
            Code::MixedWildcard,
            "'*' targets cannot be mixed with named targets",
        );
    }

    let select_modifiers = b
        .assignments
        .iter()
        .any(|a| a.distinct || a.alias.is_some());
    match kind {
        CommandKind::InsertSelect | CommandKind::CreateView | CommandKind::CreateTableAs => {
            if b.from.is_empty() {
                block_error(
                    diags,
                    b,
                    Code::MissingFrom,
                    format!("{kind} needs a FROM clause"),
                );
            }
        }
        CommandKind::InsertValues => {
            if select_modifiers {
                block_error(
                    diags,
                    b,
                    Code::SelectModifierNotAllowed,
                    "DISTINCT and aliases need a FROM clause",
                );
            }
        }
        CommandKind::Update => validate_update(b, wildcards, select_modifiers, diags),
        CommandKind::Delete => {
            if b.from.len() > 1 {
                block_error(
                    diags,
                    b,
                    Code::DeleteMultipleFrom,
                    "DELETE can name only one FROM table",
                );
            } else if let Some(r) = b.from.first() {
                if !r.name.eq_ignore_case(&b.table) {
                    diags.push(Diagnostic::warning(
                        Code::DeleteFromMismatch,
                        b.span,
                        format!(
                            "DELETE names table {} but FROM {}; deleting from {}",
                            b.table, r.name, r.name
                        ),
                    ));
                }
            }
        }
        CommandKind::CreateTableBasic | CommandKind::CreateIndex => {
            if wildcards > 0 {
                block_error(
                    diags,
                    b,
                    Code::WildcardNotAllowed,
                    format!("{kind} needs named targets"),
                );
            }
            if select_modifiers {
                block_error(
                    diags,
                    b,
                    Code::SelectModifierNotAllowed,
                    format!("DISTINCT and aliases are not allowed for {kind}"),
                );
            }
            if kind == CommandKind::CreateIndex {
                validate_index(b, diags);
            }
        }
        CommandKind::Truncate | CommandKind::DropTable | CommandKind::DropView => {}
    }
}

fn validate_update(
    b: &OperationBlock,
    wildcards: usize,
    select_modifiers: bool,
    diags: &mut Vec<Diagnostic>,
) {
    if wildcards > 0 {
        block_error(
            diags,
            b,
            Code::WildcardNotAllowed,
            "UPDATE needs named targets",
        );
    }
    let Some(nested) = &b.nested else {
        if select_modifiers {
            block_error(
                diags,
                b,
                Code::SelectModifierNotAllowed,
                "DISTINCT and aliases are not allowed in an UPDATE set list",
            );
        }
        return;
    };
    let inner_wild = nested
        .items
        .iter()
        .filter(|a| a.target == Target::Wildcard)
        .count();
    if inner_wild > 0 && inner_wild < nested.items.len() {
        block_error(
            diags,
            b,
            Code::MixedWildcard,
            "'*' targets cannot be mixed with named targets",
        );
    }
    if b.assignments.is_empty() {
        if inner_wild > 0 {
            block_error(
                diags,
                b,
                Code::WildcardNotAllowed,
                "nested items need named targets unless the outer block lists them",
            );
        }
        return;
    }
    // explicit outer tuple: `target==*` rows
    if b.assignments.iter().any(|a| !a.expr.is_star()) {
        block_error(
            diags,
            b,
            Code::NestedTargetExpr,
            "outer rows of a nested UPDATE must be 'target==*'",
        );
    }
    if b.assignments.len() != nested.items.len() {
        diags.push(Diagnostic::error(
            Code::ArityMismatch,
            b.span,
            format!(
                "UPDATE sets {} columns but the nested select yields {}",
                b.assignments.len(),
                nested.items.len()
            ),
        ));
    }
}

fn validate_index(b: &OperationBlock, diags: &mut Vec<Diagnostic>) {
    let mut tables = b.assignments.iter().filter_map(|a| match &a.target {
        Target::Column(n) => Some(n),
        Target::Wildcard => None,
    });
    if let Some(first) = tables.next() {
        if let Some(other) = tables.find(|n| !n.eq_ignore_case(first)) {
            diags.push(Diagnostic::error(
                Code::IndexTableMismatch,
                b.span,
                format!("index columns name tables {first} and {other}"),
            ));
        }
    }
    if b.assignments
        .iter()
        .any(|a| a.expr.as_column().map_or(true, |c| c.0.len() != 1))
    {
        diags.push(Diagnostic::error(
            Code::InvalidIndexColumn,
            b.span,
            "each index row must be 'table==column'",
        ));
    }
}

fn block_error(
    diags: &mut Vec<Diagnostic>,
    b: &OperationBlock,
    code: Code,
    msg: impl Into<String>,
) {
    diags.push(Diagnostic::error(code, b.span, msg));
}

fn validate_chain(chain: &Chain, diags: &mut Vec<Diagnostic>) {
    let first = &chain.blocks[0];
    let last = chain.blocks.len() - 1;
    for (i, b) in chain.blocks.iter().enumerate() {
        if !b.command.is_query_family() {
            diags.push(Diagnostic::error(
                Code::InvalidChainCommand,
                b.span,
                format!("{} cannot be combined with a set operator", b.command),
            ));
            continue;
        }
        if i > 0 && b.command != first.command {
            diags.push(Diagnostic::error(
                Code::ChainCommandMismatch,
                b.span,
                format!("chain mixes {} and {}", first.command, b.command),
            ));
        }
        if i > 0 && b.assignments.len() != first.assignments.len() {
            diags.push(Diagnostic::error(
                Code::SetChainShapeMismatch,
                b.span,
                format!(
                    "block selects {} items, the first block {}",
                    b.assignments.len(),
                    first.assignments.len()
                ),
            ));
        }
        if i > 0 && !b.table.eq_ignore_case(&first.table) {
            diags.push(Diagnostic::warning(
                Code::ChainTargetMismatch,
                b.span,
                format!("chain writes to {}; {} is ignored", first.table, b.table),
            ));
        }
        if i < last && !b.order_by.is_empty() {
            diags.push(Diagnostic::error(
                Code::OrderByInNonFinalBlock,
                b.span,
                "ORDER BY is only allowed on the last block of a chain",
            ));
        }
    }
}

/// Canonical form of a validated script: DELETE targets its FROM table.
///
/// Clause order is already canonical since each clause has its own field.
pub fn normalize(script: &Script) -> Script {
    let mut out = script.clone();
    for chain in &mut out.chains {
        for b in &mut chain.blocks {
            if b.command == CommandKind::Delete && b.from.len() == 1 {
                b.table = b.from[0].name.clone();
                if b.from[0].alias.is_none() {
                    b.from.clear();
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_text;

    fn script(src: &str) -> Script {
        let out = parse_text(src).unwrap();
        assert!(!out.has_errors(), "{:?}", out.diagnostics);
        out.script
    }

    fn codes(src: &str) -> Vec<Code> {
        let s = expand_same(&script(src)).unwrap();
        validate(&s).into_iter().map(|d| d.code).collect()
    }

    const CHAIN: &str = "{TABLE: g\nCOMMAND: insert\nA==DISTINCT 0 A\nB==x\nC==y+1\nFROM: t\n}\nUNION\n{TABLE: g\nCOMMAND: insert\nSAME:==SAME:\nFROM: u\nWHERE: a>1\n}";

    #[test]
    fn same_copies_first_block() {
        let s = expand_same(&script(CHAIN)).unwrap();
        let blocks = &s.chains[0].blocks;
        assert_eq!(blocks[1].assignments, blocks[0].assignments);
        assert!(!blocks[1].same_marker);
        assert_eq!(blocks[1].from[0].name.to_string(), "u");
        assert_eq!(blocks[1].filter.len(), 1);
        assert!(validate(&s).is_empty());
    }

    #[test]
    fn same_is_idempotent_and_identity_without_markers() {
        let once = expand_same(&script(CHAIN)).unwrap();
        let twice = expand_same(&once).unwrap();
        assert_eq!(once, twice);
        let plain = script("{TABLE: t\nCOMMAND: drop\n}");
        assert_eq!(expand_same(&plain).unwrap(), plain);
    }

    #[test]
    fn same_errors() {
        let single = script("{TABLE: t\nCOMMAND: insert\nSAME:==SAME:\nFROM: s\n}");
        let e = expand_same(&single).unwrap_err();
        assert_eq!(e[0].code, Code::SameOutsideChain);
        let first = script("{TABLE: t\nCOMMAND: insert\nSAME:==SAME:\nFROM: s\n}\nUNION\n{TABLE: t\nCOMMAND: insert\na==b\nFROM: s\n}");
        let e = expand_same(&first).unwrap_err();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].code, Code::SameInFirstBlock);
    }

    #[test]
    fn delete_from_mismatch_warns_then_normalizes() {
        let s =
            script("{\ntable:drop_call\ncommand:delete\nfrom: table_n_1\nwhere source_item>89\n}");
        let diags = validate(&s);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, Code::DeleteFromMismatch);
        assert!(!diags[0].is_error());
        let n = normalize(&s);
        let b = &n.chains[0].blocks[0];
        assert_eq!(b.table.to_string(), "table_n_1");
        assert!(b.from.is_empty());
        assert!(validate(&n).is_empty());
        assert_eq!(normalize(&n), n);
    }

    #[test]
    fn wildcard_rules() {
        assert!(codes("{TABLE: t\nCOMMAND: insert\n*=distinct a\n*=b\nFROM: s\n}").is_empty());
        assert_eq!(
            codes("{TABLE: t\nCOMMAND: insert\n*==a\nb==b\nFROM: s\n}"),
            vec![Code::MixedWildcard]
        );
    }

    #[test]
    fn nested_arity() {
        let ok = "{TABLE: t\nCOMMAND: update\n{\na==s.a\nb==s.b\nFROM: s\n}\n}";
        assert!(codes(ok).is_empty());
        let explicit = "{TABLE: t\nCOMMAND: update\na==*\nb==*\n{\n*==s.x\n*==s.y\nFROM: s\n}\n}";
        assert!(codes(explicit).is_empty());
        let bad = "{TABLE: t\nCOMMAND: update\na==*\nb==*\nc==*\n{\nx==s.x\ny==s.y\nFROM: s\n}\n}";
        assert_eq!(codes(bad), vec![Code::ArityMismatch]);
        let not_star = "{TABLE: t\nCOMMAND: update\na==1\n{\nx==s.x\nFROM: s\n}\n}";
        assert_eq!(codes(not_star), vec![Code::NestedTargetExpr]);
    }

    #[test]
    fn missing_from_and_values_clauses() {
        assert_eq!(
            codes("{TABLE: v\nCOMMAND: create view\na==b\nWHERE: b>1\n}"),
            vec![Code::MissingFrom]
        );
        assert_eq!(
            codes("{TABLE: t\nCOMMAND: insert\na==1\nWHERE: b>1\n}"),
            vec![Code::ValuesWithClauses]
        );
    }

    #[test]
    fn index_rules() {
        assert!(codes("{TABLE: ix\nCOMMAND: create index\nt==c1\nt==c2\n}").is_empty());
        assert_eq!(
            codes("{TABLE: ix\nCOMMAND: create index\nt==c1\nu==c2\n}"),
            vec![Code::IndexTableMismatch]
        );
        assert_eq!(
            codes("{TABLE: ix\nCOMMAND: create index\nt==c1+1\n}"),
            vec![Code::InvalidIndexColumn]
        );
    }

    #[test]
    fn chain_shape_and_commands() {
        let shape = "{TABLE: g\nCOMMAND: insert\na==x\nb==y\nFROM: t\n}\nMINUS\n{TABLE: g\nCOMMAND: insert\na==x\nFROM: u\n}";
        assert_eq!(codes(shape), vec![Code::SetChainShapeMismatch]);
        let cmds = "{TABLE: g\nCOMMAND: delete\n}\nUNION\n{TABLE: g\nCOMMAND: delete\n}";
        assert_eq!(
            codes(cmds),
            vec![Code::InvalidChainCommand, Code::InvalidChainCommand]
        );
        let mixed = "{TABLE: g\nCOMMAND: create\na==x\nFROM: t\n}\nUNION\n{TABLE: g\nCOMMAND: insert\na==x\nFROM: u\n}";
        assert_eq!(codes(mixed), vec![Code::ChainCommandMismatch]);
        let order = "{TABLE: g\nCOMMAND: insert\na==x\nFROM: t\nORDER BY: x\n}\nUNION\n{TABLE: g\nCOMMAND: insert\na==x\nFROM: u\n}";
        assert_eq!(codes(order), vec![Code::OrderByInNonFinalBlock]);
    }

    #[test]
    fn content_not_allowed() {
        assert_eq!(
            codes("{TABLE: t\nCOMMAND: truncate\na==b\n}"),
            vec![Code::AssignmentsNotAllowed]
        );
        assert_eq!(
            codes("{TABLE: t\nCOMMAND: update\na==b\nFROM: s\n}"),
            vec![Code::ClauseNotAllowed]
        );
        assert_eq!(
            codes("{TABLE: t\nCOMMAND: update\n}"),
            vec![Code::EmptyAssignments]
        );
    }
}
