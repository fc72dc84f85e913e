#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::path::{Path, PathBuf};

pub fn fixture_dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(sub)
}

pub fn read_fixture(sub: &str, name: &str) -> String {
    let p = fixture_dir(sub).join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Non-comment, non-blank lines of a manifest, split on whitespace.
pub fn manifest(sub: &str, name: &str) -> Vec<Vec<String>> {
    read_fixture(sub, name)
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

const SQL_KEYWORDS: &[&str] = &[
    "and",
    "as",
    "by",
    "create",
    "delete",
    "distinct",
    "drop",
    "except",
    "from",
    "group",
    "having",
    "index",
    "insert",
    "intersect",
    "into",
    "minus",
    "on",
    "or",
    "order",
    "select",
    "set",
    "table",
    "truncate",
    "union",
    "update",
    "values",
    "view",
    "where",
];

/// Token sequence used to compare SQL text: whitespace-insensitive, keywords
/// case-folded, everything else verbatim. Blanks only matter where they
/// separate two words, so `A. NAME` and `A.NAME` compare equal.
pub fn sql_tokens(sql: &str) -> Vec<String> {
    let chars: Vec<char> = sql.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if SQL_KEYWORDS.contains(&word.to_ascii_lowercase().as_str()) {
                out.push(word.to_ascii_lowercase());
            } else {
                out.push(word);
            }
        } else if c == '\'' {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i] != '\'' {
                i += 1;
            }
            i += 1;
            out.push(chars[start..i.min(chars.len())].iter().collect());
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            if ["<=", ">=", "<>", "!=", "||"].contains(&two.as_str()) {
                out.push(two);
                i += 2;
            } else {
                out.push(c.to_string());
                i += 1;
            }
        }
    }
    out
}

/// Select bodies rebuilt straight from the block text by string handling alone.
pub fn bodies_from_source(text: &str) -> Vec<String> {
    let joined = text.replace("\\\\\n", " ").replace("//\n", " ");
    let mut bodies = Vec::new();
    for block in joined.split('{').skip(1) {
        let block = block.split('}').next().unwrap();
        let mut items = Vec::new();
        let mut from = String::new();
        let mut filter = String::new();
        let mut in_where = false;
        for line in block.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("table:") || lower.starts_with("command:") {
                continue;
            } else if let Some(rest) = line.strip_prefix("FROM:") {
                from = rest.to_string();
                in_where = false;
            } else if let Some(rest) = line.strip_prefix("WHERE:") {
                filter = rest.to_string();
                in_where = true;
            } else if in_where {
                filter.push(' ');
                filter.push_str(line);
            } else if let Some((_, rhs)) = line.split_once("==") {
                items.push(rhs.to_string());
            }
        }
        bodies.push(format!(
            "select {} from {} where {}",
            items.join(","),
            from,
            filter
        ));
    }
    bodies
}
