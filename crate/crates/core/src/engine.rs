//! Probabilistic AST evolution: one randomized traversal per variant that
//! fires applicable rewrite rules with probability `p`, plus exhaustive
//! closure enumeration used to check reachability.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lean::{structural_hash, Digest, Expr, Statement};
use crate::rewrite::{
    RuleApplication, RuleError, RuleId, RuleRegistry, RuleSet, Site, TypeEnv,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Per-node firing probability, in `[0, 1]`.
    pub probability: f64,
    pub rng_seed: u64,
    pub enabled_rules: Vec<RuleId>,
    pub variants_per_statement: usize,
    /// Total rule applications allowed per variant, reordering included.
    pub max_rule_applications: usize,
    pub name_suffix: String,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            probability: 0.5,
            rng_seed: 0,
            enabled_rules: RuleId::BUILTIN.to_vec(),
            variants_per_statement: 3,
            max_rule_applications: 8,
            name_suffix: "_auged".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("probability must lie in [0, 1], got {0}")]
    Probability(f64),
    #[error("at least one rule must be enabled")]
    NoRules,
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("closure depth {requested} exceeds the safety bound {bound}")]
    DepthBound { requested: usize, bound: usize },
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(EngineError::Probability(self.probability));
        }
        if self.enabled_rules.is_empty() {
            return Err(EngineError::NoRules);
        }
        if self.variants_per_statement == 0 {
            return Err(EngineError::ZeroCount("variants_per_statement"));
        }
        if self.max_rule_applications == 0 {
            return Err(EngineError::ZeroCount("max_rule_applications"));
        }
        Ok(())
    }

    /// Seed for the `index`-th variant. Variants get independent streams so
    /// any one of them can be replayed alone.
    pub fn variant_seed(&self, index: usize) -> u64 {
        splitmix64(self.rng_seed ^ splitmix64(index as u64 + 1))
    }
}

pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ast,
    Domain,
    Difficulty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pending,
    Verified,
    Rejected,
    Skipped,
}

/// What the LLM methods record instead of rule applications.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_domain: Option<String>,
    /// Strategy label such as `s2+`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    pub model: String,
    pub prompt_sha256: String,
}

/// Provenance of one generated statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRecord {
    pub seed_statement_id: String,
    /// The statement this one was derived from, when that is itself a
    /// generated variant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    pub method: Method,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub applications: Vec<RuleApplication>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub llm: Option<LlmMetadata>,
    pub rng_seed: u64,
    pub output: String,
    pub status: Status,
}

/// Rule application with a fixed registry.
#[derive(Debug, Clone)]
pub struct Engine {
    registry: RuleRegistry,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(RuleRegistry::builtin())
    }
}

/// `evolve_ast` with the built-in rules; the seed id is the theorem name.
pub fn evolve_ast(stmt: &Statement, cfg: &EngineConfig) -> Result<Vec<EvolutionRecord>, EngineError> {
    Engine::default().evolve(&stmt.name, stmt, cfg)
}

impl Engine {
    pub fn new(registry: RuleRegistry) -> Self {
        Engine { registry }
    }

    pub fn registry(&self) -> &RuleRegistry {
        &self.registry
    }

    /// Up to `variants_per_statement` evolved variants. Variants equal (by
    /// structural hash) to the seed or an earlier variant are dropped.
    pub fn evolve(
        &self,
        seed_id: &str,
        stmt: &Statement,
        cfg: &EngineConfig,
    ) -> Result<Vec<EvolutionRecord>, EngineError> {
        cfg.validate()?;
        let rules = self.registry.select(&cfg.enabled_rules)?;
        let mut seen: HashSet<Digest> = HashSet::from([structural_hash(stmt)]);
        let mut out = Vec::new();
        for index in 0..cfg.variants_per_statement {
            let seed = cfg.variant_seed(index);
            let (mut variant, applications) = evolve_variant(stmt, cfg, &rules, seed);
            if !seen.insert(structural_hash(&variant)) {
                continue;
            }
            variant.name = format!("{}{}", stmt.name, cfg.name_suffix);
            out.push(EvolutionRecord {
                seed_statement_id: seed_id.to_string(),
                parent_id: None,
                method: Method::Ast,
                applications,
                llm: None,
                rng_seed: seed,
                output: variant.to_string(),
                status: Status::Pending,
            });
        }
        Ok(out)
    }
}

/// One randomized traversal. The theorem name is left unchanged.
pub fn evolve_variant(
    stmt: &Statement,
    cfg: &EngineConfig,
    rules: &RuleSet,
    seed: u64,
) -> (Statement, Vec<RuleApplication>) {
    let mut walk = Walk {
        rng: ChaCha8Rng::seed_from_u64(seed),
        p: cfg.probability,
        rules,
        budget: cfg.max_rule_applications,
        applications: Vec::new(),
    };
    let mut s = stmt.clone();
    for rule in &rules.statement {
        if walk.budget == 0 || !rule.applicable(&s) || !walk.rng.random_bool(walk.p) {
            continue;
        }
        let Ok(next) = rule.apply(&s, &mut walk.rng) else {
            continue;
        };
        if next != s {
            walk.applications.push(RuleApplication {
                rule: rule.id(),
                site: Site::Statement,
                node_path: Vec::new(),
                before: hypothesis_order(&s),
                after: hypothesis_order(&next),
            });
            walk.budget -= 1;
            s = next;
        }
    }
    let mut env = TypeEnv::from_statement(&s);
    for h in &mut s.hypotheses {
        let site = Site::Hypothesis(h.label.clone());
        walk.visit(&mut h.prop, &mut env, &mut Vec::new(), &site);
    }
    walk.visit(&mut s.goal, &mut env, &mut Vec::new(), &Site::Goal);
    (s, walk.applications)
}

fn hypothesis_order(s: &Statement) -> String {
    s.hypotheses
        .iter()
        .map(|h| h.label.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

struct Walk<'a> {
    rng: ChaCha8Rng,
    p: f64,
    rules: &'a RuleSet,
    budget: usize,
    applications: Vec<RuleApplication>,
}

impl Walk<'_> {
    fn visit(&mut self, node: &mut Expr, env: &mut TypeEnv, path: &mut Vec<usize>, site: &Site) {
        if self.budget == 0 {
            return;
        }
        let candidates: Vec<(RuleId, Vec<Expr>)> = self
            .rules
            .node
            .iter()
            .map(|r| (r.id(), r.rewrites(node, env)))
            .filter(|(_, c)| !c.is_empty())
            .collect();
        if !candidates.is_empty() && self.rng.random_bool(self.p) {
            let pick = self.rng.random_range(0..candidates.len());
            let (rule, mut results) = candidates.into_iter().nth(pick).expect("in range");
            let choice = self.rng.random_range(0..results.len());
            let after = results.swap_remove(choice);
            self.applications.push(RuleApplication {
                rule,
                site: site.clone(),
                node_path: path.clone(),
                before: node.to_string(),
                after: after.to_string(),
            });
            *node = after;
            self.budget -= 1;
        }
        let mark = env.len();
        env.enter_quantifier(node);
        for (i, child) in node.children_mut().into_iter().enumerate() {
            path.push(i);
            self.visit(child, env, path, site);
            path.pop();
        }
        env.truncate(mark);
    }
}

/// Result of [`enumerate_closure`].
#[derive(Debug, Clone)]
pub struct Closure {
    /// Distinct statements in discovery order, the input first.
    pub statements: Vec<Statement>,
    /// Set when the state limit cut the search short.
    pub truncated: bool,
}

impl Closure {
    pub fn contains(&self, stmt: &Statement) -> bool {
        let h = structural_hash(stmt);
        self.statements.iter().any(|s| structural_hash(s) == h)
    }
}

pub const MAX_CLOSURE_DEPTH: usize = 12;
pub const DEFAULT_CLOSURE_LIMIT: usize = 200_000;

/// Every statement reachable from `stmt` with at most `depth` node-level
/// rewrites. Statement-level rules (hypothesis reordering) cost nothing, so
/// all hypothesis orders of every reachable statement are included.
pub fn enumerate_closure(
    stmt: &Statement,
    rules: &RuleSet,
    depth: usize,
    limit: usize,
) -> Result<Closure, EngineError> {
    if depth > MAX_CLOSURE_DEPTH {
        return Err(EngineError::DepthBound {
            requested: depth,
            bound: MAX_CLOSURE_DEPTH,
        });
    }
    let mut cost: HashMap<Digest, usize> = HashMap::new();
    let mut order: Vec<Digest> = Vec::new();
    let mut states: HashMap<Digest, Statement> = HashMap::new();
    let mut queue: VecDeque<(usize, Statement)> = VecDeque::new();
    let h0 = structural_hash(stmt);
    cost.insert(h0.clone(), 0);
    order.push(h0.clone());
    states.insert(h0, stmt.clone());
    queue.push_back((0, stmt.clone()));
    let mut truncated = false;

    'search: while let Some((c, s)) = queue.pop_front() {
        if cost.get(&structural_hash(&s)).is_some_and(|&best| best < c) {
            continue;
        }
        let zero = rules.statement.iter().flat_map(|r| r.all_results(&s)).map(|n| (c, n));
        let one = if c < depth {
            node_rewrites(&s, rules).into_iter().map(|(_, n)| (c + 1, n)).collect()
        } else {
            Vec::new()
        };
        for (nc, next) in zero.collect::<Vec<_>>().into_iter().chain(one) {
            let h = structural_hash(&next);
            match cost.get(&h) {
                Some(&best) if best <= nc => continue,
                Some(_) => {}
                None => {
                    if states.len() >= limit {
                        truncated = true;
                        break 'search;
                    }
                    order.push(h.clone());
                    states.insert(h.clone(), next.clone());
                }
            }
            cost.insert(h, nc);
            if nc == c {
                queue.push_front((nc, next));
            } else {
                queue.push_back((nc, next));
            }
        }
    }
    let statements = order
        .into_iter()
        .map(|h| states.remove(&h).expect("recorded"))
        .collect();
    Ok(Closure {
        statements,
        truncated,
    })
}

/// Every single node-level rewrite of `stmt`: each rule, at each node of
/// each hypothesis and the goal, with each candidate result.
pub fn node_rewrites(stmt: &Statement, rules: &RuleSet) -> Vec<(RuleApplication, Statement)> {
    let mut out = Vec::new();
    let mut env = TypeEnv::from_statement(stmt);
    let roots: Vec<(Site, &Expr)> = stmt
        .hypotheses
        .iter()
        .map(|h| (Site::Hypothesis(h.label.clone()), &h.prop))
        .chain(std::iter::once((Site::Goal, &stmt.goal)))
        .collect();
    for (root_idx, (site, root)) in roots.into_iter().enumerate() {
        let mut found = Vec::new();
        collect_rewrites(root, &mut env, &mut Vec::new(), rules, &mut found);
        for (path, rule, before, after) in found {
            let mut next = stmt.clone();
            let root_mut = if root_idx < next.hypotheses.len() {
                &mut next.hypotheses[root_idx].prop
            } else {
                &mut next.goal
            };
            *root_mut.at_path_mut(&path).expect("valid path") = after.clone();
            out.push((
                RuleApplication {
                    rule,
                    site: site.clone(),
                    node_path: path,
                    before: before.to_string(),
                    after: after.to_string(),
                },
                next,
            ));
        }
    }
    out
}

type Found = (Vec<usize>, RuleId, Expr, Expr);

fn collect_rewrites(
    node: &Expr,
    env: &mut TypeEnv,
    path: &mut Vec<usize>,
    rules: &RuleSet,
    out: &mut Vec<Found>,
) {
    for rule in &rules.node {
        for result in rule.rewrites(node, env) {
            out.push((path.clone(), rule.id(), node.clone(), result));
        }
    }
    let mark = env.len();
    env.enter_quantifier(node);
    for (i, child) in node.children().into_iter().enumerate() {
        path.push(i);
        collect_rewrites(child, env, path, rules, out);
        path.pop();
    }
    env.truncate(mark);
}
