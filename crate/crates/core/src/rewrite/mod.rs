//! Equivalence-preserving rewrite rules over statement ASTs.
//!
//! Node rules rewrite a single expression node and may offer several
//! candidate results (associativity can regroup either way, distributivity
//! can expand on the left or the right). Statement rules act on the whole
//! statement; the only built-in one permutes hypotheses.

mod reorder;
mod rules;
mod types;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::lean::{Expr, Statement};

pub use reorder::{dependencies, is_legal_order, reorder_hypotheses, HypothesisReordering};
pub use rules::{
    Associativity, Commutativity, DeMorgan, Distributivity, DualRelationConversion,
    SymmetricOperandSwap,
};
pub use types::{Carrier, TypeEnv};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    HypothesisReordering,
    Commutativity,
    Associativity,
    Distributivity,
    DeMorgan,
    SymmetricOperandSwap,
    DualRelationConversion,
    Custom(String),
}

impl RuleId {
    pub const BUILTIN: [RuleId; 7] = [
        RuleId::HypothesisReordering,
        RuleId::Commutativity,
        RuleId::Associativity,
        RuleId::Distributivity,
        RuleId::DeMorgan,
        RuleId::SymmetricOperandSwap,
        RuleId::DualRelationConversion,
    ];

    pub fn as_str(&self) -> &str {
        match self {
            RuleId::HypothesisReordering => "hypothesis_reordering",
            RuleId::Commutativity => "commutativity",
            RuleId::Associativity => "associativity",
            RuleId::Distributivity => "distributivity",
            RuleId::DeMorgan => "de_morgan",
            RuleId::SymmetricOperandSwap => "symmetric_operand_swap",
            RuleId::DualRelationConversion => "dual_relation_conversion",
            RuleId::Custom(name) => name,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = std::convert::Infallible;

    /// Unknown names become [`RuleId::Custom`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(RuleId::BUILTIN
            .iter()
            .find(|id| id.as_str() == normalized)
            .cloned()
            .unwrap_or_else(|| RuleId::Custom(s.trim().to_string())))
    }
}

impl Serialize for RuleId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RuleId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().expect("infallible"))
    }
}

/// Where in a statement a rule fired.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    Statement,
    Hypothesis(String),
    Goal,
}

/// One rule firing, for provenance. `node_path` indexes
/// [`Expr::children`] from the hypothesis or goal root and is empty for
/// statement-level rules; `before`/`after` are the printed node (or the
/// hypothesis label order for reordering).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleApplication {
    pub rule: RuleId,
    pub site: Site,
    pub node_path: Vec<usize>,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule `{0}` does not apply here")]
    NotApplicable(RuleId),
    #[error("no rule named `{0}` is registered")]
    Unknown(RuleId),
}

/// A rewrite of a single expression node into equivalent alternatives.
pub trait NodeRule: Send + Sync {
    fn id(&self) -> RuleId;

    /// Every result this rule can produce at `node`; empty when it does not
    /// apply.
    fn rewrites(&self, node: &Expr, env: &TypeEnv) -> Vec<Expr>;

    fn applicable(&self, node: &Expr, env: &TypeEnv) -> bool {
        !self.rewrites(node, env).is_empty()
    }

    /// The first candidate of [`NodeRule::rewrites`].
    fn apply(&self, node: &Expr, env: &TypeEnv) -> Result<Expr, RuleError> {
        self.rewrites(node, env)
            .into_iter()
            .next()
            .ok_or_else(|| RuleError::NotApplicable(self.id()))
    }
}

/// A rewrite acting on the statement as a whole.
pub trait StatementRule: Send + Sync {
    fn id(&self) -> RuleId;

    fn applicable(&self, stmt: &Statement) -> bool;

    /// One randomly chosen result.
    fn apply(&self, stmt: &Statement, rng: &mut dyn RngCore) -> Result<Statement, RuleError>;

    /// Every result this rule can produce from `stmt` (possibly truncated
    /// for large inputs).
    fn all_results(&self, stmt: &Statement) -> Vec<Statement>;
}

#[derive(Clone)]
pub enum Rule {
    Node(Arc<dyn NodeRule>),
    Statement(Arc<dyn StatementRule>),
}

impl Rule {
    pub fn id(&self) -> RuleId {
        match self {
            Rule::Node(r) => r.id(),
            Rule::Statement(r) => r.id(),
        }
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rule({})", self.id())
    }
}

/// The set of rules the engine draws from. New rules can be registered
/// without touching the engine.
#[derive(Debug, Clone, Default)]
pub struct RuleRegistry {
    rules: Vec<Rule>,
}

impl RuleRegistry {
    pub fn empty() -> Self {
        RuleRegistry::default()
    }

    pub fn builtin() -> Self {
        let mut r = RuleRegistry::empty();
        r.register_statement(HypothesisReordering::default());
        r.register_node(Commutativity);
        r.register_node(Associativity);
        r.register_node(Distributivity);
        r.register_node(DeMorgan);
        r.register_node(SymmetricOperandSwap);
        r.register_node(DualRelationConversion);
        r
    }

    /// Registers a rule, replacing any rule with the same id.
    pub fn register_node(&mut self, rule: impl NodeRule + 'static) {
        self.insert(Rule::Node(Arc::new(rule)));
    }

    pub fn register_statement(&mut self, rule: impl StatementRule + 'static) {
        self.insert(Rule::Statement(Arc::new(rule)));
    }

    fn insert(&mut self, rule: Rule) {
        let id = rule.id();
        match self.rules.iter_mut().find(|r| r.id() == id) {
            Some(slot) => *slot = rule,
            None => self.rules.push(rule),
        }
    }

    pub fn ids(&self) -> Vec<RuleId> {
        self.rules.iter().map(Rule::id).collect()
    }

    pub fn get(&self, id: &RuleId) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id() == *id)
    }

    /// The registered rules named in `enabled`, in registration order.
    pub fn select(&self, enabled: &[RuleId]) -> Result<RuleSet, RuleError> {
        if let Some(missing) = enabled.iter().find(|id| self.get(id).is_none()) {
            return Err(RuleError::Unknown(missing.clone()));
        }
        let mut set = RuleSet::default();
        for rule in &self.rules {
            if enabled.contains(&rule.id()) {
                match rule {
                    Rule::Node(r) => set.node.push(r.clone()),
                    Rule::Statement(r) => set.statement.push(r.clone()),
                }
            }
        }
        Ok(set)
    }

    pub fn all(&self) -> RuleSet {
        self.select(&self.ids()).expect("own ids are registered")
    }
}

/// Rules split by kind, ready for the engine.
#[derive(Clone, Default)]
pub struct RuleSet {
    pub node: Vec<Arc<dyn NodeRule>>,
    pub statement: Vec<Arc<dyn StatementRule>>,
}

impl fmt::Debug for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.ids()).finish()
    }
}

impl RuleSet {
    pub fn ids(&self) -> Vec<RuleId> {
        self.statement
            .iter()
            .map(|r| r.id())
            .chain(self.node.iter().map(|r| r.id()))
            .collect()
    }
}
