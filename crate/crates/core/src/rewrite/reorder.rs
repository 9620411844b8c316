use std::collections::BTreeSet;

use rand::{Rng, RngCore};

use crate::lean::{free_vars, ConstantTable, Statement};

use super::{RuleError, RuleId, StatementRule};

/// Permutes the hypothesis list, keeping every hypothesis after the ones
/// whose labels it mentions.
pub struct HypothesisReordering {
    /// Upper bound on the number of orders [`StatementRule::all_results`]
    /// enumerates.
    pub enumeration_limit: usize,
}

impl Default for HypothesisReordering {
    fn default() -> Self {
        HypothesisReordering {
            enumeration_limit: 5040,
        }
    }
}

/// `deps[j]` holds the indices of earlier hypotheses that hypothesis `j`
/// refers to by label.
pub fn dependencies(stmt: &Statement) -> Vec<BTreeSet<usize>> {
    let constants = ConstantTable::empty();
    stmt.hypotheses
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let fv = free_vars(&h.prop, &constants);
            stmt.hypotheses[..j]
                .iter()
                .enumerate()
                .filter(|(_, earlier)| fv.contains(&earlier.label))
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}

pub fn is_legal_order(deps: &[BTreeSet<usize>], order: &[usize]) -> bool {
    let mut pos = vec![usize::MAX; deps.len()];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    deps.iter()
        .enumerate()
        .all(|(j, ds)| ds.iter().all(|&i| pos[i] < pos[j]))
}

fn permuted(stmt: &Statement, order: &[usize]) -> Statement {
    let mut out = stmt.clone();
    out.hypotheses = order.iter().map(|&i| stmt.hypotheses[i].clone()).collect();
    out
}

/// Topological order chosen by repeatedly picking a uniformly random
/// hypothesis whose dependencies are already placed.
fn random_order(deps: &[BTreeSet<usize>], rng: &mut dyn RngCore) -> Vec<usize> {
    let n = deps.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let ready: Vec<usize> = (0..n)
            .filter(|&j| !placed[j] && deps[j].iter().all(|&i| placed[i]))
            .collect();
        let pick = ready[rng.random_range(0..ready.len())];
        placed[pick] = true;
        order.push(pick);
    }
    order
}

/// Permutes the hypotheses by a random dependency-respecting order. An
/// identity draw is re-sampled once, so the result can still equal the
/// input; statements whose only legal order is the identity come back
/// unchanged.
pub fn reorder_hypotheses(stmt: &Statement, rng: &mut dyn RngCore) -> Statement {
    let deps = dependencies(stmt);
    let identity: Vec<usize> = (0..deps.len()).collect();
    let mut order = random_order(&deps, rng);
    if order == identity {
        order = random_order(&deps, rng);
    }
    permuted(stmt, &order)
}

fn enumerate_orders(
    deps: &[BTreeSet<usize>],
    placed: &mut Vec<bool>,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if prefix.len() == deps.len() {
        out.push(prefix.clone());
        return;
    }
    for j in 0..deps.len() {
        if !placed[j] && deps[j].iter().all(|&i| placed[i]) {
            placed[j] = true;
            prefix.push(j);
            enumerate_orders(deps, placed, prefix, out, limit);
            prefix.pop();
            placed[j] = false;
        }
    }
}

impl StatementRule for HypothesisReordering {
    fn id(&self) -> RuleId {
        RuleId::HypothesisReordering
    }

    fn applicable(&self, stmt: &Statement) -> bool {
        let n = stmt.hypotheses.len();
        if n < 2 {
            return false;
        }
        // the identity is the only legal order exactly when every
        // hypothesis depends on its predecessor
        let deps = dependencies(stmt);
        (1..n).any(|j| !deps[j].contains(&(j - 1)))
    }

    fn apply(&self, stmt: &Statement, rng: &mut dyn RngCore) -> Result<Statement, RuleError> {
        if !self.applicable(stmt) {
            return Err(RuleError::NotApplicable(self.id()));
        }
        Ok(reorder_hypotheses(stmt, rng))
    }

    fn all_results(&self, stmt: &Statement) -> Vec<Statement> {
        let deps = dependencies(stmt);
        let n = deps.len();
        let mut orders = Vec::new();
        enumerate_orders(
            &deps,
            &mut vec![false; n],
            &mut Vec::new(),
            &mut orders,
            self.enumeration_limit.saturating_add(1),
        );
        let identity: Vec<usize> = (0..n).collect();
        orders
            .into_iter()
            .filter(|o| *o != identity)
            .take(self.enumeration_limit)
            .map(|o| permuted(stmt, &o))
            .collect()
    }
}
