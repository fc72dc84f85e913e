//! Sequential execution of emitted statements against a SQL session.

mod sqlite;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

pub use sqlite::SqliteSession;

use crate::ast::{CommandKind, Script};
use crate::diag::Span;
use crate::emitter::{Dialect, EmitError, Emitter, SqlStatement};

/// Engine-neutral scalar value passed to registered functions.
#[derive(Debug, Clone, PartialEq)]
pub enum SqlValue {
    Null,
    Integer(i64),
    Real(f64),
    Text(String),
}

impl SqlValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            SqlValue::Integer(i) => Some(*i as f64),
            SqlValue::Real(r) => Some(*r),
            SqlValue::Text(t) => t.trim().parse().ok(),
            SqlValue::Null => None,
        }
    }
}

pub type Evaluator = Arc<dyn Fn(&[SqlValue]) -> SqlValue + Send + Sync>;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot connect to {locator:?}: {reason}")]
    ConnectionFailed { locator: String, reason: String },
    #[error("statement failed: {message} in `{statement}`")]
    StatementFailed {
        statement: String,
        span: Span,
        message: String,
    },
    #[error("this session cannot register functions")]
    RegistrationUnsupported,
    #[error(transparent)]
    Emit(#[from] EmitError),
}

/// A connection that runs one statement at a time.
pub trait Session {
    /// Runs exactly one statement and returns the number of rows it changed.
    fn execute(&mut self, sql: &str) -> Result<u64, String>;

    fn supports_truncate(&self) -> bool;

    fn register_function(
        &mut self,
        _name: &str,
        _arity: i32,
        _f: Evaluator,
    ) -> Result<(), RunError> {
        Err(RunError::RegistrationUnsupported)
    }

    fn begin(&mut self) -> Result<(), String> {
        self.execute("begin").map(drop)
    }

    fn commit(&mut self) -> Result<(), String> {
        self.execute("commit").map(drop)
    }

    fn rollback(&mut self) -> Result<(), String> {
        self.execute("rollback").map(drop)
    }
}

/// `<engine>:<path-or-dsn>` plus dialect and options.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSpec {
    pub locator: String,
    pub dialect: Dialect,
    pub options: BTreeMap<String, String>,
}

impl ConnectionSpec {
    pub fn new(locator: impl Into<String>, dialect: Dialect) -> Self {
        ConnectionSpec {
            locator: locator.into(),
            dialect,
            options: BTreeMap::new(),
        }
    }

    pub fn with_option(mut self, key: &str, value: impl ToString) -> Self {
        self.options.insert(key.to_string(), value.to_string());
        self
    }

    fn flag(&self, key: &str, default: bool) -> bool {
        match self.options.get(key).map(|v| v.to_ascii_lowercase()) {
            Some(v) => matches!(v.as_str(), "true" | "1" | "yes" | "on"),
            None => default,
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            stop_on_error: self.flag("stop_on_error", true),
            transactional: self.flag("transactional", false),
        }
    }

    /// Splits the locator into engine and target.
    pub fn engine(&self) -> Option<(&str, &str)> {
        self.locator.split_once(':')
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub stop_on_error: bool,
    pub transactional: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            stop_on_error: true,
            transactional: false,
        }
    }
}

/// Opens the session named by `spec`.
pub fn open_session(spec: &ConnectionSpec) -> Result<Box<dyn Session>, RunError> {
    let fail = |reason: String| RunError::ConnectionFailed {
        locator: spec.locator.clone(),
        reason,
    };
    let (engine, target) = spec
        .engine()
        .ok_or_else(|| fail("expected <engine>:<path-or-dsn>".into()))?;
    match engine.to_ascii_lowercase().as_str() {
        "sqlite" => {
            if spec.dialect != Dialect::Portable {
                return Err(fail(format!(
                    "the {} dialect does not match a sqlite engine",
                    spec.dialect
                )));
            }
            let session = SqliteSession::open(target).map_err(fail)?;
            Ok(Box::new(session))
        }
        other => Err(fail(format!("unknown engine {other:?}"))),
    }
}

/// `percent(a, b)` is `a / b`; NULL when either side is NULL or `b` is zero.
pub fn percent(args: &[SqlValue]) -> SqlValue {
    match (
        args.first().and_then(SqlValue::as_f64),
        args.get(1).and_then(SqlValue::as_f64),
    ) {
        (Some(a), Some(b)) if b != 0.0 => SqlValue::Real(a / b),
        _ => SqlValue::Null,
    }
}

pub fn register_helpers(session: &mut dyn Session) -> Result<(), RunError> {
    session.register_function("percent", 2, Arc::new(percent))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "UPPERCASE")]
pub enum Outcome {
    Ok { rows: u64 },
    Error { message: String },
}

impl Outcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, Outcome::Ok { .. })
    }
}

#[derive(Debug, Clone)]
pub struct RunEntry {
    pub index: usize,
    pub statement: SqlStatement,
    pub outcome: Outcome,
    pub elapsed: Duration,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub entries: Vec<RunEntry>,
    /// Session-level notes, e.g. helpers that could not be registered.
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct LogRecord<'a> {
    index: usize,
    kind: &'static str,
    rows: Option<u64>,
    millis: f64,
    #[serde(flatten)]
    outcome: &'a Outcome,
    statement: &'a str,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    warnings: &'a [String],
}

impl RunReport {
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|e| e.outcome.is_ok())
    }

    pub fn rows_affected(&self) -> Vec<Option<u64>> {
        self.entries
            .iter()
            .map(|e| match e.outcome {
                Outcome::Ok { rows } => Some(rows),
                Outcome::Error { .. } => None,
            })
            .collect()
    }

    pub fn first_failure(&self) -> Option<RunError> {
        self.entries.iter().find_map(|e| match &e.outcome {
            Outcome::Error { message } => Some(RunError::StatementFailed {
                statement: e.statement.text.clone(),
                span: e.statement.source_span,
                message: message.clone(),
            }),
            Outcome::Ok { .. } => None,
        })
    }

    fn extend(&mut self, other: RunReport) {
        let offset = self.entries.len();
        self.warnings.extend(other.warnings);
        self.entries.extend(other.entries.into_iter().map(|mut e| {
            e.index += offset;
            e
        }));
    }

    /// Fixed-width table for terminals.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>3}  {:<18}  {:<5}  {:>6}  {:>9}  statement",
            "#", "kind", "state", "rows", "ms"
        );
        for e in &self.entries {
            let (state, rows) = match &e.outcome {
                Outcome::Ok { rows } => ("OK", rows.to_string()),
                Outcome::Error { .. } => ("ERROR", "-".to_string()),
            };
            let mut stmt = e.statement.text.replace('\n', " ");
            if stmt.chars().count() > 60 {
                stmt = stmt.chars().take(57).collect::<String>() + "...";
            }
            let _ = writeln!(
                out,
                "{:>3}  {:<18}  {:<5}  {:>6}  {:>9.3}  {}",
                e.index + 1,
                e.statement.kind.name(),
                state,
                rows,
                e.elapsed.as_secs_f64() * 1000.0,
                stmt
            );
            if let Outcome::Error { message } = &e.outcome {
                let _ = writeln!(out, "     error: {message}");
            }
            for w in &e.warnings {
                let _ = writeln!(out, "     warning: {w}");
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }

    /// One JSON object per statement.
    pub fn write_jsonl(&self, mut w: impl Write) -> io::Result<()> {
        for e in &self.entries {
            let rec = LogRecord {
                index: e.index,
                kind: e.statement.kind.name(),
                rows: match e.outcome {
                    Outcome::Ok { rows } => Some(rows),
                    Outcome::Error { .. } => None,
                },
                millis: e.elapsed.as_secs_f64() * 1000.0,
                outcome: &e.outcome,
                statement: &e.statement.text,
                warnings: &e.warnings,
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Runs statements in order. A failed statement ends the run when
/// `stop_on_error` is set; under `transactional` any failure rolls back.
pub fn execute_statements(
    session: &mut dyn Session,
    statements: &[SqlStatement],
    options: RunOptions,
) -> RunReport {
    let mut report = RunReport::default();
    if options.transactional {
        if let Err(e) = session.begin() {
            report
                .warnings
                .push(format!("could not open a transaction: {e}"));
        }
    }
    for (index, statement) in statements.iter().enumerate() {
        let mut warnings = Vec::new();
        if statement.kind == CommandKind::Truncate && statement.text.starts_with("delete from") {
            warnings.push("TRUNCATE is not supported by this session; ran delete instead".into());
        }
        let started = Instant::now();
        let outcome = match session.execute(&statement.text) {
            Ok(rows) => Outcome::Ok { rows },
            Err(message) => Outcome::Error { message },
        };
        let failed = !outcome.is_ok();
        report.entries.push(RunEntry {
            index,
            statement: statement.clone(),
            outcome,
            elapsed: started.elapsed(),
            warnings,
        });
        if failed && options.stop_on_error {
            break;
        }
    }
    if options.transactional {
        let done = if report.all_ok() {
            session.commit()
        } else {
            session.rollback()
        };
        if let Err(e) = done {
            report.warnings.push(format!("transaction end failed: {e}"));
        }
    }
    report
}

/// Emits `script` for the session and runs it.
pub fn run_in_session(
    session: &mut dyn Session,
    script: &Script,
    dialect: Dialect,
    options: RunOptions,
) -> Result<RunReport, RunError> {
    let emitter = Emitter::new(dialect).truncate_supported(session.supports_truncate());
    let statements = emitter.emit_script(script)?;
    Ok(execute_statements(session, &statements, options))
}

/// Opens the session named by `spec`, registers helpers and runs `script`.
pub fn run_script(script: &Script, spec: &ConnectionSpec) -> Result<RunReport, RunError> {
    run_batch(std::slice::from_ref(script), spec)
}

/// Runs several scripts in one session, in order, as one report.
pub fn run_batch(scripts: &[Script], spec: &ConnectionSpec) -> Result<RunReport, RunError> {
    let mut session = open_session(spec)?;
    let mut report = RunReport::default();
    if let Err(e) = register_helpers(session.as_mut()) {
        report.warnings.push(format!("percent not registered: {e}"));
    }
    let emitter = Emitter::new(spec.dialect).truncate_supported(session.supports_truncate());
    let mut statements = Vec::new();
    for script in scripts {
        statements.extend(emitter.emit_script(script)?);
    }
    report.extend(execute_statements(
        session.as_mut(),
        &statements,
        spec.run_options(),
    ));
    Ok(report)
}
