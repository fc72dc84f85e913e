//! Seed data and a hand-written SQL reference for the execution tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rusqlite::types::Value;
use rusqlite::Connection;

pub const SEED: u64 = 0x5eed_0042;

/// `src` (100 rows) and `ref_t` (60 rows) from a fixed seed.
pub fn seed(conn: &Connection, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    conn.execute_batch(
        "CREATE TABLE src (id INTEGER PRIMARY KEY, a INTEGER, b INTEGER, grp TEXT);
         CREATE TABLE ref_t (id INTEGER, factor INTEGER, bonus INTEGER);",
    )
    .unwrap();
    for id in 1..=100 {
        let grp = ["x", "y", "z"][rng.gen_range(0..3)];
        conn.execute(
            "INSERT INTO src VALUES (?1, ?2, ?3, ?4)",
            rusqlite::params![id, rng.gen_range(0..100), rng.gen_range(0..10), grp],
        )
        .unwrap();
    }
    for id in 1..=60 {
        conn.execute(
            "INSERT INTO ref_t VALUES (?1, ?2, ?3)",
            rusqlite::params![id * 2, rng.gen_range(1..50), rng.gen_range(0..20)],
        )
        .unwrap();
    }
}

/// The pipeline fixture written out by hand. `true` marks statements whose
/// rows-affected count is meaningful; DDL reports zero.
pub const REFERENCE: &[(bool, &str)] = &[
    (
        false,
        "CREATE TABLE work AS SELECT id, a, b, grp FROM src WHERE a > 10",
    ),
    (
        false,
        "CREATE TABLE results (id INTEGER, ratio REAL, total INTEGER, grp TEXT)",
    ),
    (
        true,
        "INSERT INTO results (id, ratio, total, grp)
         SELECT id, CASE WHEN b = 0 THEN NULL ELSE CAST(a AS REAL) / b END, a + (b * 2), grp
         FROM work WHERE b >= 0",
    ),
    (true, "UPDATE results SET total = total + 1 WHERE grp = 'x'"),
    (
        true,
        "UPDATE results
         SET ratio = (SELECT factor FROM ref_t WHERE ref_t.id = results.id),
             total = (SELECT factor + bonus FROM ref_t WHERE ref_t.id = results.id)
         WHERE id < 30",
    ),
    (true, "DELETE FROM results WHERE total > 90"),
    (false, "CREATE TABLE summary (grp TEXT, n INTEGER)"),
    (
        true,
        "INSERT INTO summary (grp, n)
         SELECT grp, id FROM results WHERE id < 10
         UNION
         SELECT grp, id FROM work WHERE id > 90 AND grp <> 'z'",
    ),
];

pub const TABLES: &[&str] = &["src", "ref_t", "work", "results", "summary"];

/// Runs the reference on a freshly seeded connection, returning the counts.
pub fn run_reference(conn: &Connection) -> Vec<u64> {
    REFERENCE
        .iter()
        .map(|(dml, sql)| {
            let n = conn
                .execute(sql, [])
                .unwrap_or_else(|e| panic!("{sql}: {e}"));
            if *dml {
                n as u64
            } else {
                0
            }
        })
        .collect()
}

/// Sorted rendered rows of `table`, i.e. its row multiset.
pub fn table_state(conn: &Connection, table: &str) -> Vec<String> {
    let mut stmt = conn.prepare(&format!("SELECT * FROM {table}")).unwrap();
    let cols = stmt.column_count();
    let mut rows: Vec<String> = stmt
        .query_map([], |r| {
            let vals: Vec<String> = (0..cols)
                .map(|i| format!("{:?}", r.get::<_, Value>(i).unwrap()))
                .collect();
            Ok(vals.join("|"))
        })
        .unwrap()
        .map(Result::unwrap)
        .collect();
    rows.sort();
    rows
}

/// Count of seeded `src` rows matching `pred`, computed in SQL on the seed.
pub fn count_where(conn: &Connection, table: &str, pred: &str) -> u64 {
    conn.query_row(
        &format!("SELECT count(*) FROM {table} WHERE {pred}"),
        [],
        |r| r.get::<_, i64>(0),
    )
    .unwrap() as u64
}
