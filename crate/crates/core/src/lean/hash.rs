use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use super::ast::{BinOp, Expr, Hypothesis, Rel, Statement};
use super::printer::{print_expr, print_statement};

/// Hex-encoded SHA-256 of a normalized statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Digest(pub String);

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn sha256_hex(text: &str) -> Digest {
    Digest(hex::encode(Sha256::digest(text.as_bytes())))
}

/// Alpha-normalized statement text: theorem name and preamble dropped,
/// binder names, hypothesis labels and quantifier variables replaced by
/// positional names. Operand order is kept, so `a + b` and `b + a` differ.
pub fn normalized_form(stmt: &Statement) -> String {
    print_statement(&alpha_normalize(stmt))
}

/// Hash of [`normalized_form`]. Statements that differ only in naming hash
/// equal.
pub fn structural_hash(stmt: &Statement) -> Digest {
    sha256_hex(&normalized_form(stmt))
}

/// A coarser hash that also identifies statements equal up to
/// commutativity/associativity of `+ * ∧ ∨`, operand order of `= ≠`,
/// `a > b` versus `b < a`, and hypothesis order. Used to flag likely
/// near-duplicates, not to deduplicate.
pub fn equivalence_class_hash(stmt: &Statement) -> Digest {
    let mut s = alpha_normalize(stmt);
    for h in &mut s.hypotheses {
        h.prop = canonical(&h.prop);
    }
    s.goal = canonical(&s.goal);
    let mut props: Vec<String> = s.hypotheses.iter().map(|h| print_expr(&h.prop)).collect();
    props.sort();
    s.hypotheses = props
        .into_iter()
        .enumerate()
        .map(|(i, p)| Hypothesis {
            label: format!("#h{i}"),
            prop: Expr::Ident(p),
        })
        .collect();
    sha256_hex(&print_statement(&s))
}

struct Renamer {
    /// (original, replacement), innermost last
    scope: Vec<(String, String)>,
    fresh: usize,
}

impl Renamer {
    fn lookup(&self, name: &str) -> Option<&str> {
        self.scope
            .iter()
            .rev()
            .find(|(o, _)| o == name)
            .map(|(_, r)| r.as_str())
    }

    fn bind(&mut self, name: &str) -> String {
        let r = format!("#b{}", self.fresh);
        self.fresh += 1;
        self.scope.push((name.to_string(), r.clone()));
        r
    }

    fn rename(&mut self, name: &str) -> String {
        self.lookup(name).map_or_else(|| name.to_string(), str::to_string)
    }

    fn expr(&mut self, e: &Expr) -> Expr {
        match e {
            Expr::Ident(n) => Expr::Ident(self.rename(n)),
            Expr::NumLit(_) => e.clone(),
            Expr::App { head, args } => Expr::App {
                head: self.rename(head),
                args: args.iter().map(|a| self.expr(a)).collect(),
            },
            Expr::Binary { op, lhs, rhs } => Expr::binary(*op, self.expr(lhs), self.expr(rhs)),
            Expr::Relation { rel, lhs, rhs } => Expr::rel(*rel, self.expr(lhs), self.expr(rhs)),
            Expr::Unary { op, operand } => Expr::unary(*op, self.expr(operand)),
            Expr::Typed { expr, ty } => Expr::Typed {
                expr: Box::new(self.expr(expr)),
                ty: Box::new(self.expr(ty)),
            },
            Expr::Quantifier { kind, binder, body } => {
                let mut binder = binder.clone();
                if let Some(ty) = &binder.ty {
                    binder.ty = Some(Box::new(self.expr(ty)));
                }
                if let Some((rel, b)) = &binder.bound {
                    binder.bound = Some((*rel, Box::new(self.expr(b))));
                }
                let mark = self.scope.len();
                binder.names = binder.names.iter().map(|n| self.bind(n)).collect();
                let body = self.expr(body);
                self.scope.truncate(mark);
                Expr::Quantifier {
                    kind: *kind,
                    binder,
                    body: Box::new(body),
                }
            }
            Expr::Integral {
                var,
                lower,
                upper,
                body,
            } => {
                let lower = self.expr(lower);
                let upper = self.expr(upper);
                let mark = self.scope.len();
                let var = self.bind(var);
                let body = self.expr(body);
                self.scope.truncate(mark);
                Expr::Integral {
                    var,
                    lower: Box::new(lower),
                    upper: Box::new(upper),
                    body: Box::new(body),
                }
            }
        }
    }
}

fn alpha_normalize(stmt: &Statement) -> Statement {
    let mut r = Renamer {
        scope: Vec::new(),
        fresh: 0,
    };
    let mut out = Statement {
        preamble: String::new(),
        name: "_".to_string(),
        binders: Vec::new(),
        hypotheses: Vec::new(),
        goal: Expr::num("0"),
    };
    let mut var_idx = 0;
    for b in &stmt.binders {
        let mut b2 = b.clone();
        b2.ty = r.expr(&b.ty);
        b2.names = b
            .names
            .iter()
            .map(|n| {
                let fresh = format!("#v{var_idx}");
                var_idx += 1;
                r.scope.push((n.clone(), fresh.clone()));
                fresh
            })
            .collect();
        out.binders.push(b2);
    }
    for h in &stmt.hypotheses {
        out.hypotheses.push(Hypothesis {
            label: String::new(),
            prop: r.expr(&h.prop),
        });
    }
    for (i, h) in stmt.hypotheses.iter().enumerate() {
        let fresh = format!("#h{i}");
        out.hypotheses[i].label = fresh.clone();
        r.scope.push((h.label.clone(), fresh));
    }
    out.goal = r.expr(&stmt.goal);
    out
}

fn flatten<'a>(e: &'a Expr, op: BinOp, acc: &mut Vec<&'a Expr>) {
    match e {
        Expr::Binary { op: o, lhs, rhs } if *o == op => {
            flatten(lhs, op, acc);
            flatten(rhs, op, acc);
        }
        _ => acc.push(e),
    }
}

fn canonical(e: &Expr) -> Expr {
    match e {
        Expr::Binary { op, .. } if matches!(op, BinOp::Add | BinOp::Mul | BinOp::And | BinOp::Or) => {
            let mut operands = Vec::new();
            flatten(e, *op, &mut operands);
            let mut keyed: Vec<(String, Expr)> = operands
                .into_iter()
                .map(|o| {
                    let c = canonical(o);
                    (print_expr(&c), c)
                })
                .collect();
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            let mut it = keyed.into_iter().map(|(_, c)| c);
            let first = it.next().expect("at least two operands");
            it.fold(first, |acc, c| Expr::binary(*op, acc, c))
        }
        Expr::Binary { op, lhs, rhs } => Expr::binary(*op, canonical(lhs), canonical(rhs)),
        Expr::Relation { rel, lhs, rhs } => {
            let (l, r) = (canonical(lhs), canonical(rhs));
            match rel {
                Rel::Gt => Expr::rel(Rel::Lt, r, l),
                Rel::Ge => Expr::rel(Rel::Le, r, l),
                Rel::Eq | Rel::Ne if print_expr(&r) < print_expr(&l) => Expr::rel(*rel, r, l),
                _ => Expr::rel(*rel, l, r),
            }
        }
        Expr::Unary { op, operand } => Expr::unary(*op, canonical(operand)),
        Expr::App { head, args } => Expr::app(head.clone(), args.iter().map(canonical).collect()),
        Expr::Typed { expr, ty } => Expr::Typed {
            expr: Box::new(canonical(expr)),
            ty: ty.clone(),
        },
        Expr::Quantifier { kind, binder, body } => Expr::Quantifier {
            kind: *kind,
            binder: binder.clone(),
            body: Box::new(canonical(body)),
        },
        Expr::Integral { .. } | Expr::Ident(_) | Expr::NumLit(_) => e.clone(),
    }
}
