use super::ast::{BinOp, Expr, QuantBinder, Statement, UnOp};

const MAX_LEVEL: u32 = 1024;
/// Identifiers, literals, `(e : T)` and `|e|`: never need parentheses.
const ATOM_LEVEL: u32 = MAX_LEVEL + 1;
const INTEGRAL_LEVEL: u32 = 60;

/// Prints an expression with the minimal parentheses that make it parse
/// back to the same tree.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, 0, &mut out);
    out
}

/// Prints a statement as `theorem name (binders) (hyps) : goal := by sorry`,
/// preceded by its preamble.
pub fn print_statement(s: &Statement) -> String {
    let mut out = String::new();
    out.push_str(&s.preamble);
    out.push_str("theorem ");
    out.push_str(&s.name);
    for b in &s.binders {
        let (open, close) = if b.implicit { ('{', '}') } else { ('(', ')') };
        out.push(' ');
        out.push(open);
        out.push_str(&b.names.join(" "));
        out.push_str(" : ");
        write_expr(&b.ty, 0, &mut out);
        out.push(close);
    }
    for h in &s.hypotheses {
        out.push_str(" (");
        out.push_str(&h.label);
        out.push_str(" : ");
        write_expr(&h.prop, 0, &mut out);
        out.push(')');
    }
    out.push_str(" : ");
    write_expr(&s.goal, 0, &mut out);
    out.push(' ');
    out.push_str(Statement::TRAILER);
    out
}

fn is_abs(e: &Expr) -> bool {
    matches!(e, Expr::App { head, args } if head == "abs" && args.len() == 1)
}

fn level(e: &Expr) -> u32 {
    match e {
        Expr::Binary { op, .. } => op.levels().0,
        Expr::Unary { op, .. } => op.levels().0,
        Expr::Relation { .. } => 50,
        Expr::Quantifier { .. } => 0,
        Expr::Integral { .. } => INTEGRAL_LEVEL,
        Expr::App { .. } if is_abs(e) => ATOM_LEVEL,
        Expr::App { .. } => MAX_LEVEL,
        Expr::Typed { .. } | Expr::Ident(_) | Expr::NumLit(_) => ATOM_LEVEL,
    }
}

fn write_expr(e: &Expr, min: u32, out: &mut String) {
    if level(e) < min {
        out.push('(');
        write_bare(e, out);
        out.push(')');
    } else {
        write_bare(e, out);
    }
}

fn write_bare(e: &Expr, out: &mut String) {
    match e {
        Expr::Ident(name) | Expr::NumLit(name) => out.push_str(name),
        Expr::Binary { op, lhs, rhs } => {
            let (_, lreq, rreq) = op.levels();
            // `(f x)^3` rather than the equivalent but misleading `f x^3`
            let lreq = if *op == BinOp::Pow && matches!(**lhs, Expr::App { .. }) && !is_abs(lhs) {
                ATOM_LEVEL
            } else {
                lreq
            };
            write_expr(lhs, lreq, out);
            if *op == BinOp::Pow {
                out.push('^');
            } else {
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
            }
            write_expr(rhs, rreq, out);
        }
        Expr::Unary { op, operand } => {
            out.push_str(op.symbol());
            let (_, req) = op.levels();
            // `--x` would start a comment
            let req = if *op == UnOp::Neg && matches!(**operand, Expr::Unary { op: UnOp::Neg, .. }) {
                ATOM_LEVEL
            } else {
                req
            };
            write_expr(operand, req, out);
        }
        Expr::Relation { rel, lhs, rhs } => {
            write_expr(lhs, 51, out);
            out.push(' ');
            out.push_str(rel.symbol());
            out.push(' ');
            write_expr(rhs, 51, out);
        }
        Expr::Quantifier { kind, binder, body } => {
            out.push_str(kind.symbol());
            out.push(' ');
            write_quant_binder(binder, out);
            out.push_str(", ");
            write_expr(body, 0, out);
        }
        Expr::Integral {
            var,
            lower,
            upper,
            body,
        } => {
            out.push_str("∫ ");
            out.push_str(var);
            out.push_str(" in ");
            if matches!(**lower, Expr::NumLit(_)) {
                out.push('(');
                write_bare(lower, out);
                out.push(')');
            } else {
                write_expr(lower, 1, out);
            }
            out.push_str("..");
            write_expr(upper, 1, out);
            out.push_str(", ");
            write_expr(body, INTEGRAL_LEVEL, out);
        }
        Expr::App { head, args } => {
            if is_abs(e) {
                out.push('|');
                write_expr(&args[0], 0, out);
                out.push('|');
                return;
            }
            out.push_str(head);
            for a in args {
                out.push(' ');
                if is_abs(a) {
                    // `f |x|` is ambiguous with divisibility bars
                    out.push('(');
                    write_bare(a, out);
                    out.push(')');
                } else {
                    write_expr(a, ATOM_LEVEL, out);
                }
            }
        }
        Expr::Typed { expr, ty } => {
            out.push('(');
            write_expr(expr, 0, out);
            out.push_str(" : ");
            write_expr(ty, 0, out);
            out.push(')');
        }
    }
}

fn write_quant_binder(b: &QuantBinder, out: &mut String) {
    out.push_str(&b.names.join(" "));
    if let Some(ty) = &b.ty {
        out.push_str(" : ");
        // a nested quantifier here would swallow the comma
        write_expr(ty, 1, out);
    }
    if let Some((rel, bound)) = &b.bound {
        out.push(' ');
        out.push_str(rel.symbol());
        out.push(' ');
        write_expr(bound, 1, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lean::ast::Rel;
    use crate::lean::parser::{parse_expr, parse_statement};

    fn v(s: &str) -> Expr {
        Expr::ident(s)
    }

    #[test]
    fn evolved_target_prints_exactly() {
        let src = "theorem evolved_thm_auged (x y : ℝ) (h₁ : y < x) (h₂ : 3555 = x^3 - y^3) (h₀ : 4 = y * x) : 233 = y^2 + x^2 := by sorry";
        assert_eq!(print_statement(&parse_statement(src).unwrap()), src);
    }

    #[test]
    fn minimal_parentheses() {
        let e = Expr::binary(BinOp::Mul, Expr::binary(BinOp::Add, v("a"), v("b")), v("c"));
        assert_eq!(print_expr(&e), "(a + b) * c");
        let e = Expr::binary(BinOp::Sub, v("a"), Expr::binary(BinOp::Sub, v("b"), v("c")));
        assert_eq!(print_expr(&e), "a - (b - c)");
        let e = Expr::binary(BinOp::Sub, Expr::binary(BinOp::Sub, v("a"), v("b")), v("c"));
        assert_eq!(print_expr(&e), "a - b - c");
        let e = Expr::binary(BinOp::Pow, Expr::binary(BinOp::Pow, v("a"), v("b")), v("c"));
        assert_eq!(print_expr(&e), "(a^b)^c");
        let e = Expr::not(Expr::binary(BinOp::And, v("p"), v("q")));
        assert_eq!(print_expr(&e), "¬(p ∧ q)");
        let e = Expr::binary(BinOp::And, Expr::not(v("p")), Expr::not(v("q")));
        assert_eq!(print_expr(&e), "¬p ∧ ¬q");
    }

    #[test]
    fn double_negation_does_not_start_a_comment() {
        let e = Expr::unary(UnOp::Neg, Expr::unary(UnOp::Neg, v("y")));
        let printed = print_expr(&e);
        assert!(!printed.contains("--"));
        assert_eq!(parse_expr(&printed).unwrap(), e);
    }

    #[test]
    fn special_forms() {
        for src in [
            "|x - 1| < 2",
            "(2 : ℝ) * x ≤ Real.sqrt (x^2 + 1)",
            "∀ x ∈ Set.Icc 0 1, f x ≥ 0",
            "∃ x : ℝ, x > 0 ∧ x^2 = 2",
            "∫ x in (0)..1, (f x)^3 ≠ ∫ x in (0)..1, (g x)^3 - 15",
            "133 ∣ 11^(n + 2) + 12^(2 * n + 1)",
            "(1 - t) • P + t • Q = R",
        ] {
            assert_eq!(print_expr(&parse_expr(src).unwrap()), src);
        }
    }

    #[test]
    fn quantifier_inside_relation_is_parenthesized() {
        let q = parse_expr("∀ x : ℝ, x = x").unwrap();
        let e = Expr::binary(BinOp::And, q.clone(), Expr::rel(Rel::Eq, v("a"), v("a")));
        assert_eq!(print_expr(&e), "(∀ x : ℝ, x = x) ∧ a = a");
        let e = Expr::binary(BinOp::And, Expr::rel(Rel::Eq, v("a"), v("a")), q);
        // trailing quantifier still needs parens: min level 35 > 0
        assert_eq!(print_expr(&e), "a = a ∧ (∀ x : ℝ, x = x)");
    }
}
