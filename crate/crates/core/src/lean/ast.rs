use std::fmt;

use serde::{Deserialize, Serialize};

/// Infix operators that get their own AST node. Anything else is an opaque
/// application.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    SMul,
    Dvd,
    And,
    Or,
    Imp,
    Iff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Pow => "^",
            BinOp::SMul => "•",
            BinOp::Dvd => "∣",
            BinOp::And => "∧",
            BinOp::Or => "∨",
            BinOp::Imp => "→",
            BinOp::Iff => "↔",
        }
    }

    /// Binding level plus the minimum levels its left and right operands
    /// must have to appear without parentheses.
    pub fn levels(self) -> (u32, u32, u32) {
        match self {
            BinOp::Iff => (20, 21, 21),
            BinOp::Imp => (25, 26, 25),
            BinOp::Or => (30, 31, 30),
            BinOp::And => (35, 36, 35),
            BinOp::Dvd => (50, 51, 51),
            BinOp::Add | BinOp::Sub => (65, 65, 66),
            BinOp::Mul | BinOp::Div | BinOp::Mod => (70, 70, 71),
            BinOp::SMul => (73, 74, 73),
            BinOp::Pow => (75, 76, 75),
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Imp | BinOp::Iff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnOp {
    Not,
    Neg,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Not => "¬",
            UnOp::Neg => "-",
        }
    }

    /// (result level, operand level)
    pub fn levels(self) -> (u32, u32) {
        match self {
            UnOp::Not => (40, 40),
            UnOp::Neg => (75, 75),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Mem,
    NotMem,
}

impl Rel {
    pub const LEVEL: u32 = 50;

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "≠",
            Rel::Lt => "<",
            Rel::Le => "≤",
            Rel::Gt => ">",
            Rel::Ge => "≥",
            Rel::Mem => "∈",
            Rel::NotMem => "∉",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuantKind {
    Forall,
    Exists,
}

impl QuantKind {
    pub fn symbol(self) -> &'static str {
        match self {
            QuantKind::Forall => "∀",
            QuantKind::Exists => "∃",
        }
    }
}

/// The variables introduced by a quantifier: `x y : ℝ`, `x ∈ S`, `x > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantBinder {
    pub names: Vec<String>,
    pub ty: Option<Box<Expr>>,
    pub bound: Option<(Rel, Box<Expr>)>,
}

/// Expression tree for propositions and terms. Parentheses are not
/// represented; the printer inserts them from operator levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnOp,
        operand: Box<Expr>,
    },
    Relation {
        rel: Rel,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Quantifier {
        kind: QuantKind,
        binder: QuantBinder,
        body: Box<Expr>,
    },
    /// Interval integral `∫ x in a..b, body`.
    Integral {
        var: String,
        lower: Box<Expr>,
        upper: Box<Expr>,
        body: Box<Expr>,
    },
    App {
        head: String,
        args: Vec<Expr>,
    },
    /// Type ascription `(e : T)`.
    Typed {
        expr: Box<Expr>,
        ty: Box<Expr>,
    },
    Ident(String),
    /// Literal kept as its exact source text.
    NumLit(String),
}

impl Expr {
    pub fn ident(name: impl Into<String>) -> Expr {
        Expr::Ident(name.into())
    }

    pub fn num(text: impl Into<String>) -> Expr {
        Expr::NumLit(text.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn unary(op: UnOp, operand: Expr) -> Expr {
        Expr::Unary {
            op,
            operand: Box::new(operand),
        }
    }

    pub fn not(operand: Expr) -> Expr {
        Expr::unary(UnOp::Not, operand)
    }

    pub fn rel(rel: Rel, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Relation {
            rel,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn app(head: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::App {
            head: head.into(),
            args,
        }
    }

    /// Child expressions in a fixed order. Path indices in rewrite
    /// provenance refer to this order. Integral nodes are opaque and
    /// quantifiers expose only their body.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Binary { lhs, rhs, .. } | Expr::Relation { lhs, rhs, .. } => vec![lhs, rhs],
            Expr::Unary { operand, .. } => vec![operand],
            Expr::Quantifier { body, .. } => vec![body],
            Expr::App { args, .. } => args.iter().collect(),
            Expr::Typed { expr, .. } => vec![expr],
            Expr::Integral { .. } | Expr::Ident(_) | Expr::NumLit(_) => Vec::new(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::Binary { lhs, rhs, .. } | Expr::Relation { lhs, rhs, .. } => vec![lhs, rhs],
            Expr::Unary { operand, .. } => vec![operand],
            Expr::Quantifier { body, .. } => vec![body],
            Expr::App { args, .. } => args.iter_mut().collect(),
            Expr::Typed { expr, .. } => vec![expr],
            Expr::Integral { .. } | Expr::Ident(_) | Expr::NumLit(_) => Vec::new(),
        }
    }

    pub fn at_path(&self, path: &[usize]) -> Option<&Expr> {
        let mut node = self;
        for &i in path {
            node = *node.children().get(i)?;
        }
        Some(node)
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> Option<&mut Expr> {
        let mut node = self;
        for &i in path {
            node = node.children_mut().into_iter().nth(i)?;
        }
        Some(node)
    }

    /// Height of the tree; leaves have depth 0.
    pub fn depth(&self) -> usize {
        self.children()
            .iter()
            .map(|c| c.depth() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Whether the expression has the shape of a proposition (as opposed to
    /// a term or a type).
    pub fn is_prop_shaped(&self) -> bool {
        match self {
            Expr::Relation { .. } | Expr::Quantifier { .. } => true,
            Expr::Unary { op: UnOp::Not, .. } => true,
            Expr::Binary { op, lhs, rhs } => match op {
                BinOp::And | BinOp::Or | BinOp::Iff | BinOp::Dvd => true,
                BinOp::Imp => lhs.is_prop_shaped() || rhs.is_prop_shaped(),
                _ => false,
            },
            Expr::Ident(name) => name == "True" || name == "False",
            _ => false,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::lean::printer::print_expr(self))
    }
}

/// A binder group such as `(x y : ℝ)` or `{α : Type*}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Binder {
    pub names: Vec<String>,
    pub ty: Expr,
    pub implicit: bool,
}

/// A labelled assumption such as `(h₀ : x * y = 4)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hypothesis {
    pub label: String,
    pub prop: Expr,
}

/// A parsed `theorem` declaration.
///
/// Binders always precede hypotheses in the printed form. The proof is not
/// represented: every printed statement ends in [`Statement::TRAILER`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Statement {
    /// Comments and `import`/`open` lines that preceded the declaration,
    /// kept verbatim.
    pub preamble: String,
    pub name: String,
    pub binders: Vec<Binder>,
    pub hypotheses: Vec<Hypothesis>,
    pub goal: Expr,
}

impl Statement {
    pub const TRAILER: &'static str = ":= by sorry";

    /// Every name introduced by a binder, in order.
    pub fn binder_names(&self) -> impl Iterator<Item = &str> {
        self.binders
            .iter()
            .flat_map(|b| b.names.iter().map(String::as_str))
    }

    pub fn hypothesis(&self, label: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| h.label == label)
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::lean::printer::print_statement(self))
    }
}
