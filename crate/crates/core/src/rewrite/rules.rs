use crate::lean::{BinOp, Expr, Rel, UnOp};

use super::types::TypeEnv;
use super::{NodeRule, RuleId};

fn split(e: &Expr, op: BinOp) -> Option<(&Expr, &Expr)> {
    match e {
        Expr::Binary { op: o, lhs, rhs } if *o == op => Some((lhs, rhs)),
        _ => None,
    }
}

fn bin(op: BinOp, a: &Expr, b: &Expr) -> Expr {
    Expr::binary(op, a.clone(), b.clone())
}

fn not(e: &Expr) -> Expr {
    Expr::not(e.clone())
}

fn negated(e: &Expr) -> Option<&Expr> {
    match e {
        Expr::Unary {
            op: UnOp::Not,
            operand,
        } => Some(operand),
        _ => None,
    }
}

/// Arithmetic laws are only used where both operands live in a known
/// number system; the logical connectives always qualify.
fn law_holds(op: BinOp, a: &Expr, b: &Expr, env: &TypeEnv) -> bool {
    match op {
        BinOp::And | BinOp::Or => true,
        BinOp::Add | BinOp::Mul => env.common_carrier(a, b).is_some(),
        _ => false,
    }
}

/// `a + b ↦ b + a`, `a * b ↦ b * a`, `P ∧ Q ↦ Q ∧ P`, `P ∨ Q ↦ Q ∨ P`.
pub struct Commutativity;

impl NodeRule for Commutativity {
    fn id(&self) -> RuleId {
        RuleId::Commutativity
    }

    fn rewrites(&self, node: &Expr, env: &TypeEnv) -> Vec<Expr> {
        match node {
            Expr::Binary { op, lhs, rhs } if law_holds(*op, lhs, rhs, env) => {
                vec![bin(*op, rhs, lhs)]
            }
            _ => Vec::new(),
        }
    }
}

/// Regrouping in either direction: `(a ∘ b) ∘ c ↔ a ∘ (b ∘ c)`.
pub struct Associativity;

impl NodeRule for Associativity {
    fn id(&self) -> RuleId {
        RuleId::Associativity
    }

    fn rewrites(&self, node: &Expr, env: &TypeEnv) -> Vec<Expr> {
        let Expr::Binary { op, lhs, rhs } = node else {
            return Vec::new();
        };
        if !law_holds(*op, lhs, rhs, env) {
            return Vec::new();
        }
        let mut out = Vec::new();
        if let Some((a, b)) = split(lhs, *op) {
            out.push(Expr::binary(*op, a.clone(), bin(*op, b, rhs)));
        }
        if let Some((b, c)) = split(rhs, *op) {
            out.push(Expr::binary(*op, bin(*op, lhs, b), c.clone()));
        }
        out
    }
}

/// `(outer, inner)` pairs where `outer` distributes over `inner`.
const DISTRIBUTIVE_PAIRS: &[(BinOp, BinOp)] = &[
    (BinOp::Mul, BinOp::Add),
    (BinOp::And, BinOp::Or),
    (BinOp::Or, BinOp::And),
];

/// Expansion `a * (b + c) ↦ a * b + a * c` (either side) and the reverse
/// factoring when both summands share a structurally equal factor.
pub struct Distributivity;

impl NodeRule for Distributivity {
    fn id(&self) -> RuleId {
        RuleId::Distributivity
    }

    fn rewrites(&self, node: &Expr, env: &TypeEnv) -> Vec<Expr> {
        let Expr::Binary { op, lhs, rhs } = node else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for &(outer, inner) in DISTRIBUTIVE_PAIRS {
            if *op == outer && law_holds(outer, lhs, rhs, env) {
                if let Some((b, c)) = split(rhs, inner) {
                    out.push(Expr::binary(inner, bin(outer, lhs, b), bin(outer, lhs, c)));
                }
                if let Some((a, b)) = split(lhs, inner) {
                    out.push(Expr::binary(inner, bin(outer, a, rhs), bin(outer, b, rhs)));
                }
            }
            if *op == inner && law_holds(inner, lhs, rhs, env) {
                if let (Some((a, b)), Some((c, d))) = (split(lhs, outer), split(rhs, outer)) {
                    if a == c && law_holds(outer, a, b, env) && law_holds(outer, c, d, env) {
                        out.push(Expr::binary(outer, a.clone(), bin(inner, b, d)));
                    }
                    if b == d && law_holds(outer, a, b, env) && law_holds(outer, c, d, env) {
                        out.push(Expr::binary(outer, bin(inner, a, c), b.clone()));
                    }
                }
            }
        }
        out
    }
}

/// `¬(P ∧ Q) ↔ ¬P ∨ ¬Q` and `¬(P ∨ Q) ↔ ¬P ∧ ¬Q`, both directions.
pub struct DeMorgan;

impl NodeRule for DeMorgan {
    fn id(&self) -> RuleId {
        RuleId::DeMorgan
    }

    fn rewrites(&self, node: &Expr, _env: &TypeEnv) -> Vec<Expr> {
        let dual = |op: BinOp| if op == BinOp::And { BinOp::Or } else { BinOp::And };
        match node {
            Expr::Unary {
                op: UnOp::Not,
                operand,
            } => match &**operand {
                Expr::Binary {
                    op: op @ (BinOp::And | BinOp::Or),
                    lhs,
                    rhs,
                } => vec![Expr::binary(dual(*op), not(lhs), not(rhs))],
                _ => Vec::new(),
            },
            Expr::Binary {
                op: op @ (BinOp::And | BinOp::Or),
                lhs,
                rhs,
            } => match (negated(lhs), negated(rhs)) {
                (Some(p), Some(q)) => vec![Expr::not(bin(dual(*op), p, q))],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        }
    }
}

/// `a = b ↦ b = a`, `a ≠ b ↦ b ≠ a`.
pub struct SymmetricOperandSwap;

impl NodeRule for SymmetricOperandSwap {
    fn id(&self) -> RuleId {
        RuleId::SymmetricOperandSwap
    }

    fn rewrites(&self, node: &Expr, _env: &TypeEnv) -> Vec<Expr> {
        match node {
            Expr::Relation {
                rel: rel @ (Rel::Eq | Rel::Ne),
                lhs,
                rhs,
            } => vec![Expr::rel(*rel, (**rhs).clone(), (**lhs).clone())],
            _ => Vec::new(),
        }
    }
}

/// `a < b ↔ b > a`, `a ≤ b ↔ b ≥ a`.
pub struct DualRelationConversion;

impl NodeRule for DualRelationConversion {
    fn id(&self) -> RuleId {
        RuleId::DualRelationConversion
    }

    fn rewrites(&self, node: &Expr, _env: &TypeEnv) -> Vec<Expr> {
        let Expr::Relation { rel, lhs, rhs } = node else {
            return Vec::new();
        };
        let dual = match rel {
            Rel::Lt => Rel::Gt,
            Rel::Gt => Rel::Lt,
            Rel::Le => Rel::Ge,
            Rel::Ge => Rel::Le,
            _ => return Vec::new(),
        };
        vec![Expr::rel(dual, (**rhs).clone(), (**lhs).clone())]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lean::{parse_expr, parse_statement, print_expr};

    fn env() -> TypeEnv {
        let s = parse_statement("theorem t (a b c d x y : ℝ) (n m : ℕ) (M N : Matrix (Fin 2) (Fin 2) ℝ) (P Q R : Prop) : True := by sorry").unwrap();
        TypeEnv::from_statement(&s)
    }

    fn outs(rule: &dyn NodeRule, src: &str) -> Vec<String> {
        rule.rewrites(&parse_expr(src).unwrap(), &env())
            .iter()
            .map(print_expr)
            .collect()
    }

    #[test]
    fn commutativity() {
        assert_eq!(outs(&Commutativity, "a + b"), ["b + a"]);
        assert_eq!(outs(&Commutativity, "x * y"), ["y * x"]);
        assert_eq!(outs(&Commutativity, "P ∧ Q"), ["Q ∧ P"]);
        assert_eq!(outs(&Commutativity, "P ∨ Q"), ["Q ∨ P"]);
        assert!(outs(&Commutativity, "a - b").is_empty());
        assert!(outs(&Commutativity, "a / b").is_empty());
        assert!(outs(&Commutativity, "a^b").is_empty());
        assert!(outs(&Commutativity, "M * N").is_empty());
        assert!(outs(&Commutativity, "a * n").is_empty());
        assert!(outs(&Commutativity, "P → Q").is_empty());
    }

    #[test]
    fn associativity() {
        assert_eq!(outs(&Associativity, "a + b + c"), ["a + (b + c)"]);
        assert_eq!(outs(&Associativity, "a * (b * c)"), ["a * b * c"]);
        assert_eq!(
            outs(&Associativity, "(a + b) + (c + d)"),
            ["a + (b + (c + d))", "a + b + c + d"]
        );
        assert!(outs(&Associativity, "a - b - c").is_empty());
        assert!(outs(&Associativity, "a + b * c").is_empty());
    }

    #[test]
    fn distributivity() {
        assert_eq!(outs(&Distributivity, "a * (b + c)"), ["a * b + a * c"]);
        assert_eq!(outs(&Distributivity, "(a + b) * c"), ["a * c + b * c"]);
        assert_eq!(outs(&Distributivity, "a * b + a * c"), ["a * (b + c)"]);
        assert_eq!(outs(&Distributivity, "a * c + b * c"), ["(a + b) * c"]);
        assert_eq!(outs(&Distributivity, "P ∧ (Q ∨ R)"), ["P ∧ Q ∨ P ∧ R"]);
        assert_eq!(outs(&Distributivity, "P ∨ Q ∧ R"), ["(P ∨ Q) ∧ (P ∨ R)"]);
        assert!(outs(&Distributivity, "a * b + c * d").is_empty());
        assert!(outs(&Distributivity, "a * (b - c)").is_empty());
    }

    #[test]
    fn de_morgan() {
        assert_eq!(outs(&DeMorgan, "¬(P ∧ Q)"), ["¬P ∨ ¬Q"]);
        assert_eq!(outs(&DeMorgan, "¬(P ∨ Q)"), ["¬P ∧ ¬Q"]);
        assert_eq!(outs(&DeMorgan, "¬P ∨ ¬Q"), ["¬(P ∧ Q)"]);
        assert_eq!(outs(&DeMorgan, "¬P ∧ ¬Q"), ["¬(P ∨ Q)"]);
        assert!(outs(&DeMorgan, "¬P").is_empty());
        assert!(outs(&DeMorgan, "P ∧ ¬Q").is_empty());
    }

    #[test]
    fn relations() {
        assert_eq!(outs(&SymmetricOperandSwap, "a = b + 1"), ["b + 1 = a"]);
        assert_eq!(outs(&SymmetricOperandSwap, "a ≠ b"), ["b ≠ a"]);
        assert!(outs(&SymmetricOperandSwap, "a < b").is_empty());
        assert_eq!(outs(&DualRelationConversion, "a < b"), ["b > a"]);
        assert_eq!(outs(&DualRelationConversion, "a ≥ b"), ["b ≤ a"]);
        assert!(outs(&DualRelationConversion, "a = b").is_empty());
        assert!(outs(&DualRelationConversion, "a ∈ b").is_empty());
    }

    #[test]
    fn apply_is_first_candidate_or_error() {
        let e = parse_expr("a - b").unwrap();
        assert!(Commutativity.apply(&e, &env()).is_err());
        let e = parse_expr("a + b").unwrap();
        assert_eq!(print_expr(&Commutativity.apply(&e, &env()).unwrap()), "b + a");
    }
}
