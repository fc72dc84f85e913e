//! Canonical script-language printer.
//!
//! Output has one clause per line, `==` assignments, uppercase keywords and
//! no comments or continuations. Parsing the output gives back an equal
//! [`Script`]; the round-trip tests rely on that.

use std::fmt::Write;

use crate::ast::*;

pub fn emit_script_text(script: &Script) -> String {
    let mut out = String::new();
    for chain in &script.chains {
        for (i, block) in chain.blocks.iter().enumerate() {
            if i > 0 {
                out.push_str(chain.connectors[i - 1].as_str());
                out.push('\n');
            }
            write_block(&mut out, block);
        }
    }
    out
}

fn write_block(out: &mut String, b: &OperationBlock) {
    out.push_str("{\n");
    let _ = writeln!(out, "TABLE: {}", b.table);
    let _ = writeln!(out, "COMMAND: {}", b.command.keyword());
    if b.same_marker {
        out.push_str("SAME:==SAME:\n");
    }
    for a in &b.assignments {
        write_assignment(out, a);
    }
    if let Some(n) = &b.nested {
        out.push_str("{\n");
        for a in &n.items {
            write_assignment(out, a);
        }
        write_from(out, &n.from);
        write_conditions(out, "WHERE", &n.filter);
        out.push_str("}\n");
    }
    write_from(out, &b.from);
    write_conditions(out, "WHERE", &b.filter);
    if !b.group_by.is_empty() {
        let items: Vec<String> = b.group_by.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "GROUP BY: {}", items.join(", "));
    }
    write_conditions(out, "HAVING", &b.having);
    if !b.order_by.is_empty() {
        let items: Vec<String> = b
            .order_by
            .iter()
            .map(|o| match o.direction {
                None => o.expr.to_string(),
                Some(Direction::Asc) => format!("{} ASC", o.expr),
                Some(Direction::Desc) => format!("{} DESC", o.expr),
            })
            .collect();
        let _ = writeln!(out, "ORDER BY: {}", items.join(", "));
    }
    out.push_str("}\n");
}

fn write_assignment(out: &mut String, a: &Assignment) {
    match &a.target {
        Target::Wildcard => out.push('*'),
        Target::Column(name) => {
            let _ = write!(out, "{name}");
        }
    }
    out.push_str("==");
    if a.distinct {
        out.push_str("DISTINCT ");
    }
    let _ = write!(out, "{}", a.expr);
    if let Some(alias) = &a.alias {
        let _ = write!(out, " {alias}");
    }
    out.push('\n');
}

fn write_from(out: &mut String, from: &[TableRef]) {
    if from.is_empty() {
        return;
    }
    let refs: Vec<String> = from
        .iter()
        .map(|r| match &r.alias {
            Some(a) => format!("{} {}", r.name, a),
            None => r.name.to_string(),
        })
        .collect();
    let _ = writeln!(out, "FROM: {}", refs.join(", "));
}

fn write_conditions(out: &mut String, kw: &str, conds: &[Condition]) {
    if conds.is_empty() {
        return;
    }
    let texts: Vec<String> = conds.iter().map(Condition::text).collect();
    let _ = writeln!(out, "{kw}: {}", texts.join(", "));
}
