//! Test-side oracles: a reference evaluator over exact rationals and
//! booleans, and random expression generators.
#![allow(dead_code)]

pub mod semantics;

use std::collections::HashMap;

use leanaug::lean::{BinOp, Expr, Rel, UnOp};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(BigRational),
    Bool(bool),
}

pub type Assignment = HashMap<String, Value>;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn num(e: &Expr, env: &Assignment) -> Option<BigRational> {
    match eval(e, env)? {
        Value::Num(n) => Some(n),
        Value::Bool(_) => None,
    }
}

fn truth(e: &Expr, env: &Assignment) -> Option<bool> {
    match eval(e, env)? {
        Value::Bool(b) => Some(b),
        Value::Num(_) => None,
    }
}

/// `None` for anything outside the evaluable fragment, division by zero,
/// or non-natural exponents.
pub fn eval(e: &Expr, env: &Assignment) -> Option<Value> {
    Some(match e {
        Expr::Ident(n) => env.get(n)?.clone(),
        Expr::NumLit(t) => Value::Num(BigRational::from_integer(t.parse::<BigInt>().ok()?)),
        Expr::Unary { op: UnOp::Neg, operand } => Value::Num(-num(operand, env)?),
        Expr::Unary { op: UnOp::Not, operand } => Value::Bool(!truth(operand, env)?),
        Expr::Binary { op, lhs, rhs } => match op {
            BinOp::Add => Value::Num(num(lhs, env)? + num(rhs, env)?),
            BinOp::Sub => Value::Num(num(lhs, env)? - num(rhs, env)?),
            BinOp::Mul => Value::Num(num(lhs, env)? * num(rhs, env)?),
            BinOp::Div => {
                let d = num(rhs, env)?;
                if d.is_zero() {
                    return None;
                }
                Value::Num(num(lhs, env)? / d)
            }
            BinOp::Pow => {
                let exp = num(rhs, env)?;
                if !exp.is_integer() || exp.is_negative() {
                    return None;
                }
                let k = exp.to_integer().to_u32()?;
                let base = num(lhs, env)?;
                let mut acc = BigRational::one();
                for _ in 0..k {
                    acc *= &base;
                }
                Value::Num(acc)
            }
            BinOp::And => Value::Bool(truth(lhs, env)? & truth(rhs, env)?),
            BinOp::Or => Value::Bool(truth(lhs, env)? | truth(rhs, env)?),
            BinOp::Imp => Value::Bool(!truth(lhs, env)? | truth(rhs, env)?),
            BinOp::Iff => Value::Bool(truth(lhs, env)? == truth(rhs, env)?),
            _ => return None,
        },
        Expr::Relation { rel, lhs, rhs } => {
            let (a, b) = (num(lhs, env)?, num(rhs, env)?);
            Value::Bool(match rel {
                Rel::Eq => a == b,
                Rel::Ne => a != b,
                Rel::Lt => a < b,
                Rel::Le => a <= b,
                Rel::Gt => a > b,
                Rel::Ge => a >= b,
                _ => return None,
            })
        }
        _ => return None,
    })
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    rat(rng.random_range(-20..=20), rng.random_range(1..=9))
}

/// Rational assignment to `vars`; with probability 1/4 every variable gets
/// the same value so relations see ties.
pub fn random_assignment(rng: &mut ChaCha8Rng, vars: &[&str]) -> Assignment {
    let tie = rng.random_range(0..4) == 0;
    let shared = random_rational(rng);
    vars.iter()
        .map(|v| {
            let x = if tie { shared.clone() } else { random_rational(rng) };
            (v.to_string(), Value::Num(x))
        })
        .collect()
}

/// All 2^n boolean assignments to `atoms`.
pub fn all_truth_assignments(atoms: &[&str]) -> Vec<Assignment> {
    (0..1u32 << atoms.len())
        .map(|bits| {
            atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.to_string(), Value::Bool(bits >> i & 1 == 1)))
                .collect()
        })
        .collect()
}

/// Random arithmetic term over `vars` and small literals using + - * and
/// small powers.
pub fn random_term(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> Expr {
    if depth == 0 || rng.random_range(0..4) == 0 {
        return if rng.random_range(0..4) == 0 {
            Expr::num(rng.random_range(0..6).to_string())
        } else {
            Expr::ident(vars[rng.random_range(0..vars.len())])
        };
    }
    let op = match rng.random_range(0..7) {
        0 | 1 => BinOp::Add,
        2 | 3 => BinOp::Mul,
        4 => BinOp::Sub,
        5 => {
            let base = random_term(rng, vars, depth - 1);
            return Expr::binary(BinOp::Pow, base, Expr::num(rng.random_range(0..4).to_string()));
        }
        _ => return Expr::unary(UnOp::Neg, random_term(rng, vars, depth - 1)),
    };
    Expr::binary(op, random_term(rng, vars, depth - 1), random_term(rng, vars, depth - 1))
}

/// Random propositional formula over `atoms` with ∧ ∨ ¬ →.
pub fn random_formula(rng: &mut ChaCha8Rng, atoms: &[&str], depth: usize) -> Expr {
    if depth == 0 || rng.random_range(0..5) == 0 {
        return Expr::ident(atoms[rng.random_range(0..atoms.len())]);
    }
    match rng.random_range(0..7) {
        0 | 1 => Expr::binary(
            BinOp::And,
            random_formula(rng, atoms, depth - 1),
            random_formula(rng, atoms, depth - 1),
        ),
        2 | 3 => Expr::binary(
            BinOp::Or,
            random_formula(rng, atoms, depth - 1),
            random_formula(rng, atoms, depth - 1),
        ),
        4 => Expr::binary(
            BinOp::Imp,
            random_formula(rng, atoms, depth - 1),
            random_formula(rng, atoms, depth - 1),
        ),
        _ => Expr::not(random_formula(rng, atoms, depth - 1)),
    }
}

/// Every formula over `atoms` with ¬ ∧ ∨ up to `depth`.
pub fn all_formulas(atoms: &[&str], depth: usize) -> Vec<Expr> {
    let mut level: Vec<Expr> = atoms.iter().map(|a| Expr::ident(*a)).collect();
    for _ in 0..depth {
        let mut next = level.clone();
        for f in &level {
            next.push(Expr::not(f.clone()));
        }
        for a in &level {
            for b in &level {
                next.push(Expr::binary(BinOp::And, a.clone(), b.clone()));
                next.push(Expr::binary(BinOp::Or, a.clone(), b.clone()));
            }
        }
        next.sort_by_key(|e| e.to_string());
        next.dedup();
        level = next;
    }
    level
}
