mod common;

use std::collections::HashSet;

use common::gen::Gen;
use dsqlt::ast::{equals, CommandKind, Script};
use dsqlt::parser::parse_text;
use dsqlt::printer::emit_script_text;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_611;

fn batch(n: usize) -> Vec<Script> {
    let mut g = Gen::new(ChaCha8Rng::seed_from_u64(SEED));
    (0..n).map(|i| g.script(i)).collect()
}

#[test]
fn printed_scripts_parse_back_equal() {
    let scripts = batch(500);
    let mut failures = Vec::new();
    for (i, s) in scripts.iter().enumerate() {
        let text = emit_script_text(s);
        match parse_text(&text) {
            Ok(out) if !out.has_errors() && equals(&out.script, s) => {}
            Ok(out) => failures.push(format!("#{i}\n{text}\n{:?}", out.diagnostics)),
            Err(e) => failures.push(format!("#{i}\n{text}\n{e}")),
        }
    }
    assert!(
        failures.is_empty(),
        "{} failures, first:\n{}",
        failures.len(),
        failures[0]
    );
}

#[test]
fn batch_covers_the_grammar() {
    let scripts = batch(500);
    let kinds: HashSet<CommandKind> = scripts
        .iter()
        .flat_map(|s| s.blocks().map(|b| b.command))
        .collect();
    assert_eq!(kinds.len(), CommandKind::ALL.len());
    let connectors: HashSet<usize> = scripts
        .iter()
        .flat_map(|s| s.chains.iter().map(|c| c.connectors.len()))
        .collect();
    assert_eq!(connectors, (0..=3).collect());
    assert!(scripts
        .iter()
        .flat_map(Script::blocks)
        .any(|b| b.nested.is_some()));
    assert!(scripts
        .iter()
        .flat_map(Script::blocks)
        .any(|b| b.same_marker));
    let sizes: HashSet<usize> = scripts
        .iter()
        .flat_map(|s| s.blocks().map(|b| b.assignments.len()))
        .collect();
    assert!((0..=8).all(|n| sizes.contains(&n)), "{sizes:?}");
}

#[test]
fn equals_is_an_equivalence() {
    let scripts = batch(40);
    for a in &scripts {
        assert!(equals(a, a));
        for b in &scripts {
            assert_eq!(equals(a, b), equals(b, a));
            for c in scripts.iter().take(10) {
                if equals(a, b) && equals(b, c) {
                    assert!(equals(a, c));
                }
            }
        }
    }
}

#[test]
fn printing_is_a_fixed_point() {
    for s in batch(100) {
        let once = emit_script_text(&s);
        let twice = emit_script_text(&parse_text(&once).unwrap().script);
        assert_eq!(once, twice);
    }
}
