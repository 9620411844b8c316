//! Lean 4 theorem statements: AST, parser, printer, scoping and structural
//! hashing.
//!
//! The supported subset covers binder groups, labelled hypotheses, the usual
//! arithmetic/logical/relational operators, `∀`/`∃` with typed or bounded
//! binders, interval integrals, type ascriptions and function application.
//! Everything else is rejected with a [`ParseError`] so callers can pass the
//! statement through untouched.

mod ast;
mod hash;
mod lexer;
mod parser;
mod printer;
mod scope;

pub use ast::{BinOp, Binder, Expr, Hypothesis, QuantBinder, QuantKind, Rel, Statement, UnOp};
pub use hash::{equivalence_class_hash, normalized_form, structural_hash, Digest};
pub use parser::{parse_expr, parse_statement, parse_statement_with, ParseOptions};
pub use printer::{print_expr, print_statement};
pub use scope::{check_scope, free_vars, ConstantTable, UnboundName};

use std::fmt;

/// Location of a parse failure. `line` and `column` are 1-based, the column
/// counted in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub fn from_offset(src: &str, offset: usize) -> Position {
        let offset = offset.min(src.len());
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let column = before[line_start..].chars().count() + 1;
        Position {
            offset,
            line,
            column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub position: Position,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub(crate) fn at(
        src: &str,
        offset: usize,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> ParseError {
        ParseError {
            position: Position::from_offset(src, offset),
            expected: expected.into(),
            found: found.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: expected {}, found `{}`",
            self.position.line, self.position.column, self.expected, self.found
        )
    }
}
