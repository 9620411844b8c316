//! Per-rule semantic checks shared by the rule suite and the acceptance
//! harness. Each check panics on the first counterexample.

use std::collections::BTreeSet;

use leanaug::engine::node_rewrites;
use leanaug::lean::{Binder, Expr, Hypothesis, Rel, Statement};
use leanaug::rewrite::{dependencies, is_legal_order, reorder_hypotheses, RuleId, RuleRegistry, RuleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

pub const VARS: [&str; 3] = ["a", "b", "c"];
pub const ATOMS: [&str; 3] = ["P", "Q", "R"];
pub const INSTANCES: usize = 100;

pub fn only(rule: RuleId) -> RuleSet {
    RuleRegistry::builtin().select(&[rule]).unwrap()
}

pub fn wrap(ty: &str, names: &[&str], hyps: Vec<Expr>, goal: Expr) -> Statement {
    Statement {
        preamble: String::new(),
        name: "t".into(),
        binders: vec![Binder {
            names: names.iter().map(|s| s.to_string()).collect(),
            ty: Expr::ident(ty),
            implicit: false,
        }],
        hypotheses: hyps
            .into_iter()
            .enumerate()
            .map(|(i, prop)| Hypothesis {
                label: format!("h{i}"),
                prop,
            })
            .collect(),
        goal,
    }
}

pub fn rel_lhs(goal: &Expr) -> &Expr {
    match goal {
        Expr::Relation { lhs, .. } => lhs,
        _ => panic!("goal is not a relation"),
    }
}

/// Draws instances until `count` of them admit at least one rewrite by
/// `rule`, and returns (instance, rewrites) pairs.
pub fn instances(
    rule: &RuleId,
    count: usize,
    mut make: impl FnMut(&mut ChaCha8Rng) -> Statement,
) -> Vec<(Statement, Vec<Statement>)> {
    let rules = only(rule.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 100_000, "generator rarely produces {rule} sites");
        let s = make(&mut rng);
        let rewrites: Vec<Statement> = node_rewrites(&s, &rules).into_iter().map(|(_, t)| t).collect();
        if !rewrites.is_empty() {
            out.push((s, rewrites));
        }
    }
    out
}

pub fn arithmetic_instance(rng: &mut ChaCha8Rng) -> Statement {
    let depth = rng.random_range(1..=4);
    let term = random_term(rng, &VARS, depth);
    wrap("ℝ", &VARS, vec![], Expr::rel(Rel::Eq, term, Expr::num("0")))
}

pub fn logic_instance(rng: &mut ChaCha8Rng) -> Statement {
    let depth = rng.random_range(1..=4);
    wrap("Prop", &ATOMS, vec![], random_formula(rng, &ATOMS, depth))
}

pub fn relation_instance(rng: &mut ChaCha8Rng) -> Statement {
    let rels = [Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge];
    let rel = rels[rng.random_range(0..rels.len())];
    let (dl, dr) = (rng.random_range(0..=2), rng.random_range(0..=2));
    let lhs = random_term(rng, &VARS, dl);
    let rhs = random_term(rng, &VARS, dr);
    wrap("ℝ", &VARS, vec![], Expr::rel(rel, lhs, rhs))
}

pub fn check_numeric(rule: RuleId) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (s, rewrites) in instances(&rule, INSTANCES, arithmetic_instance) {
        for _ in 0..100 {
            let env = random_assignment(&mut rng, &VARS);
            let before = eval(rel_lhs(&s.goal), &env).expect("evaluable");
            for t in &rewrites {
                let after = eval(rel_lhs(&t.goal), &env).expect("evaluable");
                assert_eq!(before, after, "{rule}: {} vs {}", s.goal, t.goal);
            }
        }
    }
}

pub fn check_truth_tables(rule: RuleId) {
    let tables = all_truth_assignments(&ATOMS);
    for (s, rewrites) in instances(&rule, INSTANCES, logic_instance) {
        for env in &tables {
            let before = eval(&s.goal, env).expect("evaluable");
            for t in &rewrites {
                assert_eq!(before, eval(&t.goal, env).unwrap(), "{rule}: {} vs {}", s.goal, t.goal);
            }
        }
    }
}

pub fn check_relations(rule: RuleId) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ties = 0;
    for (s, rewrites) in instances(&rule, INSTANCES, relation_instance) {
        for _ in 0..100 {
            let env = random_assignment(&mut rng, &VARS);
            if let Expr::Relation { lhs, rhs, .. } = &s.goal {
                ties += usize::from(eval(lhs, &env) == eval(rhs, &env));
            }
            let before = eval(&s.goal, &env).expect("evaluable");
            for t in &rewrites {
                assert_eq!(before, eval(&t.goal, &env).unwrap(), "{rule}: {} vs {}", s.goal, t.goal);
            }
        }
    }
    assert!(ties > 100, "tie cases must be exercised");
}

pub fn check_reordering() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..INSTANCES {
        let n = rng.random_range(2..=5);
        let hyps: Vec<Expr> = (0..n)
            .map(|i| {
                // occasionally mention an earlier label to create a dependency
                if i > 0 && rng.random_range(0..3) == 0 {
                    let j = rng.random_range(0..i);
                    Expr::rel(Rel::Eq, Expr::ident(format!("h{j}")), Expr::ident(format!("h{j}")))
                } else {
                    Expr::rel(Rel::Lt, random_term(&mut rng, &VARS, 1), random_term(&mut rng, &VARS, 1))
                }
            })
            .collect();
        let s = wrap("ℝ", &VARS, hyps, Expr::rel(Rel::Ge, Expr::ident("a"), Expr::ident("b")));
        let deps = dependencies(&s);
        let r = reorder_hypotheses(&s, &mut rng);
        assert_eq!(r.goal, s.goal);
        assert_eq!(r.binders, s.binders);
        let labels = |st: &Statement| st.hypotheses.iter().map(|h| h.label.clone()).collect::<BTreeSet<_>>();
        assert_eq!(labels(&r), labels(&s));
        let order: Vec<usize> = r
            .hypotheses
            .iter()
            .map(|h| s.hypotheses.iter().position(|g| g == h).unwrap())
            .collect();
        assert!(is_legal_order(&deps, &order));
    }
}

