use rusqlite::functions::FunctionFlags;
use rusqlite::types::{Value, ValueRef};
use rusqlite::Connection;

use super::{Evaluator, RunError, Session, SqlValue};

/// Embedded SQLite session. SQLite has no TRUNCATE.
pub struct SqliteSession {
    conn: Connection,
}

impl SqliteSession {
    /// `:memory:` or a file path.
    pub fn open(target: &str) -> Result<Self, String> {
        let conn = if target == ":memory:" || target.is_empty() {
            Connection::open_in_memory()
        } else {
            Connection::open(target)
        }
        .map_err(|e| e.to_string())?;
        // Connection::open is lazy about unusable paths; force a read.
        conn.query_row("select count(*) from sqlite_master", [], |r| {
            r.get::<_, i64>(0)
        })
        .map_err(|e| e.to_string())?;
        Ok(SqliteSession { conn })
    }

    pub fn from_connection(conn: Connection) -> Self {
        SqliteSession { conn }
    }

    pub fn connection(&self) -> &Connection {
        &self.conn
    }

    pub fn into_connection(self) -> Connection {
        self.conn
    }
}

fn from_ref(v: ValueRef<'_>) -> SqlValue {
    match v {
        ValueRef::Null | ValueRef::Blob(_) => SqlValue::Null,
        ValueRef::Integer(i) => SqlValue::Integer(i),
        ValueRef::Real(r) => SqlValue::Real(r),
        ValueRef::Text(t) => SqlValue::Text(String::from_utf8_lossy(t).into_owned()),
    }
}

fn to_value(v: SqlValue) -> Value {
    match v {
        SqlValue::Null => Value::Null,
        SqlValue::Integer(i) => Value::Integer(i),
        SqlValue::Real(r) => Value::Real(r),
        SqlValue::Text(t) => Value::Text(t),
    }
}

impl Session for SqliteSession {
    fn execute(&mut self, sql: &str) -> Result<u64, String> {
        // changes() keeps the previous DML count across DDL, total_changes() does not move
        let before = self.conn.total_changes();
        self.conn.execute(sql, []).map_err(|e| e.to_string())?;
        Ok(self.conn.total_changes() - before)
    }

    fn supports_truncate(&self) -> bool {
        false
    }

    fn register_function(&mut self, name: &str, arity: i32, f: Evaluator) -> Result<(), RunError> {
        self.conn
            .create_scalar_function(
                name,
                arity,
                FunctionFlags::SQLITE_UTF8 | FunctionFlags::SQLITE_DETERMINISTIC,
                move |ctx| {
                    let args: Vec<SqlValue> =
                        (0..ctx.len()).map(|i| from_ref(ctx.get_raw(i))).collect();
                    Ok(to_value(f(&args)))
                },
            )
            .map_err(|e| RunError::ConnectionFailed {
                locator: "sqlite".into(),
                reason: e.to_string(),
            })
    }

    fn begin(&mut self) -> Result<(), String> {
        self.conn.execute_batch("begin").map_err(|e| e.to_string())
    }

    fn commit(&mut self) -> Result<(), String> {
        self.conn.execute_batch("commit").map_err(|e| e.to_string())
    }

    fn rollback(&mut self) -> Result<(), String> {
        self.conn
            .execute_batch("rollback")
            .map_err(|e| e.to_string())
    }
}
