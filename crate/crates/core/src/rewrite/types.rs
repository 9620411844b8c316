use crate::lean::{BinOp, Expr, Statement, UnOp};

/// Number systems on which `+` and `*` are known to be commutative,
/// associative and distributive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    Real,
    Int,
    Nat,
    Rat,
    Complex,
    /// A bare numeric literal, compatible with any carrier.
    Numeral,
}

impl Carrier {
    pub fn from_type(ty: &Expr) -> Option<Carrier> {
        match ty {
            Expr::Ident(n) => match n.as_str() {
                "ℝ" | "Real" => Some(Carrier::Real),
                "ℤ" | "Int" => Some(Carrier::Int),
                "ℕ" | "Nat" => Some(Carrier::Nat),
                "ℚ" | "Rat" => Some(Carrier::Rat),
                "ℂ" | "Complex" => Some(Carrier::Complex),
                _ => None,
            },
            _ => None,
        }
    }

    fn unify(a: Carrier, b: Carrier) -> Option<Carrier> {
        match (a, b) {
            (Carrier::Numeral, x) | (x, Carrier::Numeral) => Some(x),
            (x, y) if x == y => Some(x),
            _ => None,
        }
    }
}

/// Functions with a fixed codomain that commonly appear unqualified or
/// qualified in statements.
const REAL_FUNCTIONS: &[&str] = &[
    "Real.sqrt", "Real.exp", "Real.log", "Real.sin", "Real.cos", "Real.tan", "Real.pi", "Real.arctan",
    "sqrt", "exp", "log", "sin", "cos", "tan", "π",
];
const NAT_FUNCTIONS: &[&str] = &["Nat.gcd", "Nat.lcm", "Nat.factorial", "Nat.choose", "Nat.totient"];

/// Syntactic typing context: the declared type of each bound name,
/// innermost binding last.
#[derive(Debug, Clone, Default)]
pub struct TypeEnv {
    bindings: Vec<(String, Expr)>,
}

impl TypeEnv {
    pub fn from_statement(stmt: &Statement) -> TypeEnv {
        let mut env = TypeEnv::default();
        for b in &stmt.binders {
            for n in &b.names {
                env.bind(n.clone(), b.ty.clone());
            }
        }
        env
    }

    pub fn bind(&mut self, name: String, ty: Expr) {
        self.bindings.push((name, ty));
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.bindings.truncate(len);
    }

    /// Extends the environment with the variables a quantifier introduces.
    /// Variables without a type annotation shadow outer names with an
    /// unknown type.
    pub fn enter_quantifier(&mut self, e: &Expr) {
        if let Expr::Quantifier { binder, .. } = e {
            let ty = binder.ty.as_deref().cloned().unwrap_or(Expr::ident("?"));
            for n in &binder.names {
                self.bind(n.clone(), ty.clone());
            }
        }
    }

    pub fn type_of(&self, name: &str) -> Option<&Expr> {
        self.bindings
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    /// Best-effort carrier of a term; `None` when unknown or mixed.
    pub fn carrier(&self, e: &Expr) -> Option<Carrier> {
        match e {
            Expr::NumLit(_) => Some(Carrier::Numeral),
            Expr::Ident(n) => match self.type_of(n) {
                Some(ty) => Carrier::from_type(ty),
                None if n == "π" => Some(Carrier::Real),
                None => None,
            },
            Expr::App { head, args } => {
                if head == "abs" && args.len() == 1 {
                    return self.carrier(&args[0]);
                }
                if let Some(ty) = self.type_of(head) {
                    return Carrier::from_type(codomain(ty, args.len())?);
                }
                if REAL_FUNCTIONS.contains(&head.as_str()) {
                    Some(Carrier::Real)
                } else if NAT_FUNCTIONS.contains(&head.as_str()) {
                    Some(Carrier::Nat)
                } else {
                    None
                }
            }
            Expr::Binary { op, lhs, rhs } => match op {
                BinOp::Pow => self.carrier(lhs),
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    Carrier::unify(self.carrier(lhs)?, self.carrier(rhs)?)
                }
                _ => None,
            },
            Expr::Unary {
                op: UnOp::Neg,
                operand,
            } => self.carrier(operand),
            Expr::Typed { ty, .. } => Carrier::from_type(ty),
            _ => None,
        }
    }

    /// Carrier shared by both operands of an arithmetic node.
    pub fn common_carrier(&self, a: &Expr, b: &Expr) -> Option<Carrier> {
        Carrier::unify(self.carrier(a)?, self.carrier(b)?)
    }
}

/// Result type of a function type `A → B → C` applied to `arity` arguments.
fn codomain(ty: &Expr, arity: usize) -> Option<&Expr> {
    let mut t = ty;
    for _ in 0..arity {
        match t {
            Expr::Binary {
                op: BinOp::Imp,
                rhs,
                ..
            } => t = rhs,
            _ => return None,
        }
    }
    Some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lean::{parse_expr, parse_statement};

    #[test]
    fn carriers_from_binders_and_functions() {
        let s = parse_statement("theorem t (x : ℝ) (n : ℕ) (f : ℝ → ℝ) (M : Matrix (Fin 2) (Fin 2) ℝ) : x = x := by sorry").unwrap();
        let env = TypeEnv::from_statement(&s);
        let c = |src: &str| env.carrier(&parse_expr(src).unwrap());
        assert_eq!(c("x + 2"), Some(Carrier::Real));
        assert_eq!(c("f x * Real.sqrt x"), Some(Carrier::Real));
        assert_eq!(c("n^2 + 1"), Some(Carrier::Nat));
        assert_eq!(c("x + n"), None);
        assert_eq!(c("M"), None);
        assert_eq!(c("2 + 3"), Some(Carrier::Numeral));
        assert_eq!(c("(2 : ℤ) * 3"), Some(Carrier::Int));
        assert_eq!(c("y"), None);
    }
}
