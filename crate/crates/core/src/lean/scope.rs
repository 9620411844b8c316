use std::collections::{BTreeSet, HashSet};

use super::ast::{Expr, Statement};

/// Names that may appear in a statement without being bound by it.
///
/// Namespace-qualified names (`Real.sqrt`, `Set.Icc`) are always treated as
/// global constants; the table lists the unqualified ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantTable {
    names: HashSet<String>,
}

const DEFAULT_CONSTANTS: &[&str] = &[
    // sorts and carriers
    "ℝ", "ℕ", "ℤ", "ℚ", "ℂ", "Prop", "Type", "Type*", "Sort", "Bool", "Real", "Nat", "Int",
    "Rat", "Complex",
    // type constructors
    "Set", "Finset", "Fin", "EuclideanSpace", "Matrix", "Polynomial", "List", "Multiset", "ZMod",
    "Option",
    // functions and predicates
    "abs", "dist", "deriv", "exp", "log", "sin", "cos", "tan", "sqrt", "max", "min", "gcd", "lcm",
    "choose", "factorial", "floor", "ceil", "id", "Even", "Odd", "Prime", "Continuous",
    "ContinuousOn", "Differentiable", "DifferentiableOn", "Monotone", "StrictMono", "Antitone",
    "StrictAnti", "IsLeast", "IsGreatest", "Injective", "Surjective", "Bijective", "True", "False",
    "π", "volume", "Icc", "Ico", "Ioc", "Ioo", "Iic", "Iio", "Ici", "Ioi", "range", "card",
    "Nat.gcd", "Real.sqrt",
];

impl Default for ConstantTable {
    fn default() -> Self {
        ConstantTable::new(DEFAULT_CONSTANTS.iter().copied())
    }
}

impl ConstantTable {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ConstantTable {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn empty() -> Self {
        ConstantTable {
            names: HashSet::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>) {
        self.names.insert(name.into());
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name) || is_qualified(name)
    }
}

fn is_qualified(name: &str) -> bool {
    name.contains('.') && !name.starts_with('.') && !name.ends_with('.')
}

/// Identifiers of `expr` not bound by an enclosing quantifier or integral,
/// excluding constants.
pub fn free_vars(expr: &Expr, constants: &ConstantTable) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut bound = Vec::new();
    collect(expr, constants, &mut bound, &mut out);
    out
}

fn collect(
    expr: &Expr,
    constants: &ConstantTable,
    bound: &mut Vec<String>,
    out: &mut BTreeSet<String>,
) {
    let mut note = |name: &str, bound: &Vec<String>| {
        if !bound.iter().any(|b| b == name) && !constants.contains(name) {
            out.insert(name.to_string());
        }
    };
    match expr {
        Expr::Ident(name) => note(name, bound),
        Expr::NumLit(_) => {}
        Expr::App { head, args } => {
            note(head, bound);
            for a in args {
                collect(a, constants, bound, out);
            }
        }
        Expr::Binary { lhs, rhs, .. } | Expr::Relation { lhs, rhs, .. } => {
            collect(lhs, constants, bound, out);
            collect(rhs, constants, bound, out);
        }
        Expr::Unary { operand, .. } => collect(operand, constants, bound, out),
        Expr::Typed { expr, ty } => {
            collect(expr, constants, bound, out);
            collect(ty, constants, bound, out);
        }
        Expr::Quantifier { binder, body, .. } => {
            // types and bounds are evaluated outside the new scope
            if let Some(ty) = &binder.ty {
                collect(ty, constants, bound, out);
            }
            if let Some((_, b)) = &binder.bound {
                collect(b, constants, bound, out);
            }
            let mark = bound.len();
            bound.extend(binder.names.iter().cloned());
            collect(body, constants, bound, out);
            bound.truncate(mark);
        }
        Expr::Integral {
            var,
            lower,
            upper,
            body,
        } => {
            collect(lower, constants, bound, out);
            collect(upper, constants, bound, out);
            bound.push(var.clone());
            collect(body, constants, bound, out);
            bound.pop();
        }
    }
}

/// An identifier that is neither bound nor a known constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnboundName {
    pub name: String,
    /// Where it occurs: a binder name, a hypothesis label, or `goal`.
    pub site: String,
}

/// Checks that every identifier in binder types, hypotheses and the goal is
/// introduced by an earlier binder or is a constant.
pub fn check_scope(stmt: &Statement, constants: &ConstantTable) -> Result<(), UnboundName> {
    let mut in_scope: HashSet<&str> = HashSet::new();
    for binder in &stmt.binders {
        for name in free_vars(&binder.ty, constants) {
            if !in_scope.contains(name.as_str()) {
                return Err(UnboundName {
                    name,
                    site: binder.names.join(" "),
                });
            }
        }
        in_scope.extend(binder.names.iter().map(String::as_str));
    }
    // hypotheses and the goal may mention earlier hypothesis labels
    for hyp in &stmt.hypotheses {
        for name in free_vars(&hyp.prop, constants) {
            if !in_scope.contains(name.as_str()) {
                return Err(UnboundName {
                    name,
                    site: hyp.label.clone(),
                });
            }
        }
        in_scope.insert(hyp.label.as_str());
    }
    for name in free_vars(&stmt.goal, constants) {
        if !in_scope.contains(name.as_str()) {
            return Err(UnboundName {
                name,
                site: "goal".to_string(),
            });
        }
    }
    Ok(())
}
