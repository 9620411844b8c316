mod common;

use std::collections::BTreeSet;

use common::semantics::*;
use common::*;
use leanaug::engine::{enumerate_closure, node_rewrites};
use leanaug::lean::{parse_statement, Expr, Rel, Statement};
use leanaug::rewrite::{dependencies, is_legal_order, HypothesisReordering, RuleId, RuleRegistry, StatementRule};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[test]
fn commutativity_preserves_values() {
    check_numeric(RuleId::Commutativity);
    check_truth_tables(RuleId::Commutativity);
}

#[test]
fn associativity_preserves_values() {
    check_numeric(RuleId::Associativity);
    check_truth_tables(RuleId::Associativity);
}

#[test]
fn distributivity_preserves_values() {
    check_numeric(RuleId::Distributivity);
    check_truth_tables(RuleId::Distributivity);
}

#[test]
fn de_morgan_preserves_truth_tables() {
    check_truth_tables(RuleId::DeMorgan);
}

#[test]
fn relation_rules_preserve_truth_including_ties() {
    check_relations(RuleId::SymmetricOperandSwap);
    check_relations(RuleId::DualRelationConversion);
}

#[test]
fn logical_rules_on_every_small_formula() {
    // every ¬/∧/∨ formula of depth ≤ 2 over three atoms, every rewrite site
    let tables = all_truth_assignments(&ATOMS);
    let rules = RuleRegistry::builtin()
        .select(&[
            RuleId::DeMorgan,
            RuleId::Distributivity,
            RuleId::Commutativity,
            RuleId::Associativity,
        ])
        .unwrap();
    let formulas = all_formulas(&ATOMS, 2);
    assert!(formulas.len() > 1000);
    let mut checked = 0;
    for f in formulas {
        let s = wrap("Prop", &ATOMS, vec![], f);
        for (_, t) in node_rewrites(&s, &rules) {
            for env in &tables {
                assert_eq!(eval(&s.goal, env), eval(&t.goal, env), "{} vs {}", s.goal, t.goal);
            }
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn every_rewrite_is_invertible() {
    let all = RuleRegistry::builtin().all();
    let small_arith = |rng: &mut ChaCha8Rng| {
        let depth = rng.random_range(1..=3);
        let term = random_term(rng, &VARS, depth);
        wrap("ℝ", &VARS, vec![], Expr::rel(Rel::Eq, term, Expr::num("0")))
    };
    let small_logic = |rng: &mut ChaCha8Rng| {
        let depth = rng.random_range(1..=3);
        wrap("Prop", &ATOMS, vec![], random_formula(rng, &ATOMS, depth))
    };
    let cases: Vec<(RuleId, Box<dyn FnMut(&mut ChaCha8Rng) -> Statement>)> = vec![
        (RuleId::Commutativity, Box::new(small_arith)),
        (RuleId::Associativity, Box::new(small_arith)),
        (RuleId::Distributivity, Box::new(small_arith)),
        (RuleId::Distributivity, Box::new(small_logic)),
        (RuleId::DeMorgan, Box::new(small_logic)),
        (RuleId::SymmetricOperandSwap, Box::new(relation_instance)),
        (RuleId::DualRelationConversion, Box::new(relation_instance)),
    ];
    for (rule, make) in cases {
        for (s, rewrites) in instances(&rule, 15, make) {
            for t in rewrites {
                let back = enumerate_closure(&t, &all, 2, 100_000).unwrap();
                assert!(back.contains(&s), "{rule}: cannot return from {} to {}", t.goal, s.goal);
            }
        }
    }
}

#[test]
fn reordering_keeps_hypotheses_and_goal() {
    semantics::check_reordering();
}

#[test]
fn all_permutations_of_independent_hypotheses_are_legal() {
    let s = parse_statement("theorem evolved_thm (x y : ℝ) (h₀ : x * y = 4) (h₁ : x > y) (h₂ : x^3 - y^3 = 3555) : x^2 + y^2 = 233 := by sorry").unwrap();
    let deps = dependencies(&s);
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for p in perms {
        assert!(is_legal_order(&deps, &p));
    }
    let produced: BTreeSet<String> = HypothesisReordering::default()
        .all_results(&s)
        .iter()
        .map(|r| r.hypotheses.iter().map(|h| h.label.as_str()).collect::<Vec<_>>().join(","))
        .collect();
    assert_eq!(produced.len(), 5);
    assert!(!produced.contains("h₀,h₁,h₂"));
}
