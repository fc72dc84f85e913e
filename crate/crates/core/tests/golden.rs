mod common;

use common::{bodies_from_source, read_fixture, sql_tokens};
use dsqlt::emitter::{Dialect, Emitter, SqlStatement};
use dsqlt::lexer::RawSource;

fn emit(name: &str, dialect: Dialect) -> Vec<SqlStatement> {
    let text = read_fixture("examples", name);
    let out = dsqlt::compile(&RawSource::new(name, text));
    let script = out
        .script
        .unwrap_or_else(|| panic!("{name}: {:?}", out.diagnostics));
    Emitter::new(dialect).emit_script(&script).unwrap()
}

#[test]
fn examples_one_to_four_match_reference_sql() {
    for n in 1..=4 {
        let stmts = emit(&format!("ex{n}.dsql"), Dialect::OracleStyle);
        assert_eq!(stmts.len(), 1, "ex{n}");
        let want = read_fixture("examples", &format!("ex{n}.sql"));
        assert_eq!(
            sql_tokens(&stmts[0].text),
            sql_tokens(&want),
            "ex{n}: {}",
            stmts[0].text
        );
    }
}

#[test]
fn exact_text_for_delete_and_insert() {
    assert_eq!(
        emit("ex4.dsql", Dialect::OracleStyle)[0].text,
        "delete from table_n_1 where source_item_5>89"
    );
    assert_eq!(
        emit("ex1.dsql", Dialect::OracleStyle)[0].text,
        "insert into drop_call select distinct item1,item2,item3 from table_name where item1>80"
    );
}

#[test]
fn example_five_is_one_union_insert() {
    let stmts = emit("ex5.dsql", Dialect::OracleStyle);
    assert_eq!(stmts.len(), 1);
    let want = read_fixture("examples", "ex5.sql");
    assert_eq!(
        sql_tokens(&stmts[0].text),
        sql_tokens(&want),
        "{}",
        stmts[0].text
    );
}

#[test]
fn example_five_bodies_follow_the_blocks() {
    let text = read_fixture("examples", "ex5.dsql");
    let want = bodies_from_source(&text);
    assert_eq!(want.len(), 2);
    let stmt = &emit("ex5.dsql", Dialect::OracleStyle)[0].text;
    let (head, rest) = stmt.split_once(" select ").unwrap();
    assert_eq!(
        head,
        "insert into gos_test(NETWORK,OVERFLOW,TOTAL,SHIJIAN,BTS_NAME,BTS_ID)"
    );
    let rest = format!("select {rest}");
    let got: Vec<&str> = rest.split(" union ").collect();
    assert_eq!(got.len(), 2);
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(sql_tokens(g), sql_tokens(w));
    }
}

#[test]
fn dialects_only_differ_in_connector_and_truncate() {
    let mut scripts: Vec<String> = (1..=5)
        .map(|n| read_fixture("examples", &format!("ex{n}.dsql")))
        .collect();
    scripts.push(read_fixture("exec", "pipeline.dsql"));
    scripts.push("{TABLE: t\nCOMMAND: truncate\n}\n{TABLE: g\nCOMMAND: insert\na==x\nFROM: s\n}\nMINUS\n{TABLE: g\nCOMMAND: insert\nSAME:==SAME:\nFROM: u\n}\n".into());
    for text in scripts {
        let script = dsqlt::compile(&RawSource::new("s", text)).script.unwrap();
        let oracle = Emitter::new(Dialect::OracleStyle)
            .emit_script(&script)
            .unwrap();
        let portable = Emitter::new(Dialect::Portable)
            .emit_script(&script)
            .unwrap();
        assert_eq!(oracle.len(), portable.len());
        for (o, p) in oracle.iter().zip(&portable) {
            let normalized = o
                .text
                .replace(" minus ", " except ")
                .replace("truncate table ", "delete from ");
            assert_eq!(normalized, p.text);
        }
    }
}

#[test]
fn emission_is_deterministic() {
    for n in 1..=5 {
        let a = emit(&format!("ex{n}.dsql"), Dialect::Portable);
        let b = emit(&format!("ex{n}.dsql"), Dialect::Portable);
        assert_eq!(a, b);
    }
}

#[test]
fn insert_column_list_matches_select_arity() {
    let stmt = &emit("ex3.dsql", Dialect::Portable)[0].text;
    let cols = stmt.split('(').nth(1).unwrap().split(')').next().unwrap();
    assert_eq!(cols.split(',').count(), 3);
    let stmt = &emit("ex5.dsql", Dialect::Portable)[0].text;
    let cols = stmt.split('(').nth(1).unwrap().split(')').next().unwrap();
    assert_eq!(cols.split(',').count(), 6);
}
