//! Transpiler for a block-structured data-integration script language.
//!
//! A script is a sequence of `{ ... }` operation blocks, each naming a target
//! table, a command and `target==expression` assignments followed by optional
//! FROM / WHERE / GROUP BY / HAVING / ORDER BY clauses. Blocks joined by
//! UNION, INTERSECT or MINUS become one combined statement.
//!
//! ```
//! use dsqlt::{compile, emitter::{Dialect, Emitter}, lexer::RawSource};
//!
//! let src = RawSource::new("ex.dsql", "{\n table:t\n command:delete\n where: a>1\n}\n");
//! let out = compile(&src);
//! let script = out.script.expect("valid script");
//! let sql = Emitter::new(Dialect::Portable).emit_script(&script).unwrap();
//! assert_eq!(sql[0].text, "delete from t where a>1");
//! ```

pub mod analyzer;
pub mod ast;
pub mod cli;
pub mod diag;
pub mod emitter;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod runner;

use ast::Script;
use diag::{sort_diagnostics, Diagnostic};
use lexer::RawSource;

/// Result of the front end: every diagnostic, and the normalized script when
/// there were no errors.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub script: Option<Script>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Compiled {
    pub fn has_errors(&self) -> bool {
        diag::has_errors(&self.diagnostics)
    }
}

/// Preprocess, parse, expand SAME markers, validate and normalize.
pub fn compile(source: &RawSource) -> Compiled {
    let lines = match lexer::preprocess(source) {
        Ok(lines) => lines,
        Err(e) => {
            return Compiled {
                script: None,
                diagnostics: vec![Diagnostic::from(&e)],
            }
        }
    };
    let parsed = parser::parse_script(&lines);
    let mut diagnostics = parsed.diagnostics;
    if diag::has_errors(&diagnostics) {
        return Compiled {
            script: None,
            diagnostics,
        };
    }
    let expanded = match analyzer::expand_same(&parsed.script) {
        Ok(s) => s,
        Err(errs) => {
            diagnostics.extend(errs);
            sort_diagnostics(&mut diagnostics);
            return Compiled {
                script: None,
                diagnostics,
            };
        }
    };
    diagnostics.extend(analyzer::validate(&expanded));
    sort_diagnostics(&mut diagnostics);
    let script = (!diag::has_errors(&diagnostics)).then(|| analyzer::normalize(&expanded));
    Compiled {
        script,
        diagnostics,
    }
}
