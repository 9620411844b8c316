use std::collections::HashSet;

use super::ast::{BinOp, Binder, Expr, Hypothesis, QuantBinder, QuantKind, Rel, Statement, UnOp};
use super::lexer::{tokenize, Keyword, Tok, Token};
use super::scope::{check_scope, ConstantTable};
use super::ParseError;

const MAX_LEVEL: u32 = 1024;
const INTEGRAL_LEVEL: u32 = 60;

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub constants: ConstantTable,
    /// Reject statements that mention names that are neither bound nor in
    /// the constant table.
    pub strict_scope: bool,
    /// Accept leading comments and `import`/`open`/`set_option` lines.
    pub allow_preamble: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            constants: ConstantTable::default(),
            strict_scope: true,
            allow_preamble: true,
        }
    }
}

impl ParseOptions {
    /// Syntax only: no scope check.
    pub fn lenient() -> Self {
        ParseOptions {
            strict_scope: false,
            ..ParseOptions::default()
        }
    }
}

pub fn parse_statement(src: &str) -> Result<Statement, ParseError> {
    parse_statement_with(src, &ParseOptions::default())
}

pub fn parse_statement_with(src: &str, opts: &ParseOptions) -> Result<Statement, ParseError> {
    let decl_start = skip_preamble(src)?;
    let preamble = src[..decl_start].trim();
    if !preamble.is_empty() && !opts.allow_preamble {
        return Err(ParseError::at(src, 0, "theorem declaration", first_word(src)));
    }
    let tokens = tokenize(src, decl_start)?;
    let mut p = Parser {
        src,
        tokens,
        idx: 0,
        abs_depth: 0,
    };
    let mut stmt = p.declaration()?;
    if !preamble.is_empty() {
        stmt.preamble = format!("{preamble}\n");
    }
    if opts.strict_scope {
        if let Err(unbound) = check_scope(&stmt, &opts.constants) {
            let offset = p.find_ident(&unbound.name).unwrap_or(decl_start);
            return Err(ParseError::at(
                src,
                offset,
                "bound identifier or known constant",
                unbound.name,
            ));
        }
    }
    Ok(stmt)
}

/// Parses a standalone expression (no declaration around it).
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(src, 0)?;
    let mut p = Parser {
        src,
        tokens,
        idx: 0,
        abs_depth: 0,
    };
    let e = p.expr(0)?;
    p.expect(Tok::Eof, "end of expression")?;
    Ok(e)
}

fn first_word(s: &str) -> String {
    s.split_whitespace().next().unwrap_or("").to_string()
}

/// Returns the byte offset of the first token that is not part of the
/// comment/import header.
fn skip_preamble(src: &str) -> Result<usize, ParseError> {
    const HEADER_WORDS: &[&str] = &["import ", "open ", "set_option ", "universe "];
    let mut pos = 0;
    loop {
        let rest = &src[pos..];
        let trimmed = rest.trim_start();
        pos += rest.len() - trimmed.len();
        if trimmed.starts_with("--") || HEADER_WORDS.iter().any(|w| trimmed.starts_with(w)) {
            pos += trimmed.find('\n').map_or(trimmed.len(), |i| i + 1);
        } else if trimmed.starts_with("/-") {
            let mut depth = 0usize;
            let mut i = pos;
            loop {
                let r = &src[i..];
                if r.is_empty() {
                    return Err(ParseError::at(src, pos, "end of block comment `-/`", "end of input"));
                }
                if r.starts_with("/-") {
                    depth += 1;
                    i += 2;
                } else if r.starts_with("-/") {
                    depth -= 1;
                    i += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    i += r.chars().next().map_or(1, char::len_utf8);
                }
            }
            pos = i;
        } else {
            return Ok(pos);
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    idx: usize,
    /// Nesting depth of `|…|`; inside, an infix `|` closes instead of
    /// meaning divisibility.
    abs_depth: usize,
}

enum Group {
    Binder(Binder),
    Hypothesis(Hypothesis, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.idx].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.idx + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn offset(&self) -> usize {
        self.tokens[self.idx].start
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.idx].tok.clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::at(self.src, self.offset(), expected, self.peek().describe())
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => Err(self.error(expected)),
        }
    }

    fn find_ident(&self, name: &str) -> Option<usize> {
        self.tokens
            .iter()
            .find(|t| matches!(&t.tok, Tok::Ident(n) if n == name))
            .map(|t| t.start)
    }

    fn declaration(&mut self) -> Result<Statement, ParseError> {
        match self.peek() {
            Tok::Keyword(Keyword::Theorem) | Tok::Keyword(Keyword::Lemma) => {
                self.bump();
            }
            Tok::Keyword(Keyword::Def) => return Err(self.error("theorem declaration (definitions are not supported)")),
            _ => return Err(self.error("theorem declaration")),
        }
        let name = self.ident("theorem name")?;
        let mut binders = Vec::new();
        let mut hypotheses = Vec::new();
        let mut labels: HashSet<String> = HashSet::new();
        let mut type_vars: HashSet<String> = HashSet::new();
        loop {
            match self.peek() {
                Tok::LParen | Tok::LBrace => {}
                Tok::LBracket => return Err(self.error("explicit or implicit binder (instance binders are not supported)")),
                _ => break,
            }
            match self.group(&type_vars)? {
                Group::Binder(b) => {
                    if is_sort(&b.ty) {
                        type_vars.extend(b.names.iter().cloned());
                    }
                    for n in &b.names {
                        if labels.contains(n) {
                            return Err(ParseError::at(self.src, self.tokens[self.idx - 1].start, "fresh binder name", n.clone()));
                        }
                    }
                    binders.push(b);
                }
                Group::Hypothesis(h, at) => {
                    let clashes = labels.contains(&h.label)
                        || binders.iter().any(|b: &Binder| b.names.contains(&h.label));
                    if clashes {
                        return Err(ParseError::at(self.src, at, "unique hypothesis label", h.label));
                    }
                    labels.insert(h.label.clone());
                    hypotheses.push(h);
                }
            }
        }
        self.expect(Tok::Colon, "`:` before the goal")?;
        let goal = self.expr(0)?;
        match self.peek() {
            // whatever proof follows is discarded and replaced by the trailer
            Tok::ColonEq | Tok::Eof => {}
            _ => return Err(self.error("`:=`")),
        }
        Ok(Statement {
            preamble: String::new(),
            name,
            binders,
            hypotheses,
            goal,
        })
    }

    fn group(&mut self, type_vars: &HashSet<String>) -> Result<Group, ParseError> {
        let implicit = matches!(self.bump(), Tok::LBrace);
        let close = if implicit { Tok::RBrace } else { Tok::RParen };
        let first_at = self.offset();
        let mut names = vec![self.ident("binder name")?];
        loop {
            match self.peek().clone() {
                Tok::Ident(n) => {
                    self.bump();
                    names.push(n);
                }
                // `(x, y : ℝ)` is accepted and normalized to `(x y : ℝ)`
                Tok::Comma if matches!(self.peek_at(1), Tok::Ident(_)) => {
                    self.bump();
                }
                _ => break,
            }
        }
        self.expect(Tok::Colon, "`:` in binder")?;
        let saved = self.abs_depth;
        self.abs_depth = 0;
        let ty = self.expr(0)?;
        self.abs_depth = saved;
        self.expect(close, if implicit { "`}`" } else { "`)`" })?;

        let type_like = is_type_like(&ty, type_vars);
        if !implicit && !type_like {
            if names.len() > 1 {
                if ty.is_prop_shaped() {
                    return Err(ParseError::at(self.src, first_at, "a single hypothesis label", names.join(" ")));
                }
            } else {
                return Ok(Group::Hypothesis(
                    Hypothesis {
                        label: names.remove(0),
                        prop: ty,
                    },
                    first_at,
                ));
            }
        }
        Ok(Group::Binder(Binder {
            names,
            ty,
            implicit,
        }))
    }

    fn expr(&mut self, min: u32) -> Result<Expr, ParseError> {
        let (mut lhs, mut level) = self.prefix()?;
        loop {
            let (kind, (op_level, lreq, rreq)) = match self.peek() {
                Tok::Bin(op) => (Infix::Bin(*op), op.levels()),
                Tok::Minus => (Infix::Bin(BinOp::Sub), BinOp::Sub.levels()),
                Tok::Bar if self.abs_depth == 0 => (Infix::Bin(BinOp::Dvd), BinOp::Dvd.levels()),
                Tok::Rel(r) => (Infix::Rel(*r), (Rel::LEVEL, Rel::LEVEL + 1, Rel::LEVEL + 1)),
                _ => break,
            };
            if op_level < min || level < lreq {
                break;
            }
            self.bump();
            let rhs = self.expr(rreq)?;
            lhs = match kind {
                Infix::Bin(op) => Expr::binary(op, lhs, rhs),
                Infix::Rel(r) => Expr::rel(r, lhs, rhs),
            };
            level = op_level;
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<(Expr, u32), ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                let (lvl, operand_lvl) = UnOp::Not.levels();
                Ok((Expr::not(self.expr(operand_lvl)?), lvl))
            }
            Tok::Minus => {
                self.bump();
                let (lvl, operand_lvl) = UnOp::Neg.levels();
                Ok((Expr::unary(UnOp::Neg, self.expr(operand_lvl)?), lvl))
            }
            Tok::Forall | Tok::Exists => Ok((self.quantifier()?, 0)),
            Tok::Integral => Ok((self.integral()?, INTEGRAL_LEVEL)),
            Tok::Ident(head) => {
                self.bump();
                let mut args = Vec::new();
                while matches!(self.peek(), Tok::Ident(_) | Tok::Num(_) | Tok::LParen) {
                    args.push(self.atom()?);
                }
                let e = if args.is_empty() {
                    Expr::Ident(head)
                } else {
                    Expr::App { head, args }
                };
                Ok((e, MAX_LEVEL))
            }
            _ => Ok((self.atom()?, MAX_LEVEL)),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr::Ident(name))
            }
            Tok::Num(text) => {
                self.bump();
                Ok(Expr::NumLit(text))
            }
            Tok::LParen => {
                self.bump();
                let saved = self.abs_depth;
                self.abs_depth = 0;
                let inner = self.expr(0)?;
                let e = if *self.peek() == Tok::Colon {
                    self.bump();
                    let ty = self.expr(0)?;
                    Expr::Typed {
                        expr: Box::new(inner),
                        ty: Box::new(ty),
                    }
                } else {
                    inner
                };
                self.abs_depth = saved;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Bar => {
                self.bump();
                self.abs_depth += 1;
                let inner = self.expr(0)?;
                self.abs_depth -= 1;
                self.expect(Tok::Bar, "closing `|`")?;
                Ok(Expr::app("abs", vec![inner]))
            }
            _ => Err(self.error("expression")),
        }
    }

    fn quantifier(&mut self) -> Result<Expr, ParseError> {
        let kind = match self.bump() {
            Tok::Forall => QuantKind::Forall,
            _ => QuantKind::Exists,
        };
        let mut binders = Vec::new();
        if *self.peek() == Tok::LParen {
            while *self.peek() == Tok::LParen {
                self.bump();
                let mut names = vec![self.ident("bound variable")?];
                while let Tok::Ident(n) = self.peek().clone() {
                    self.bump();
                    names.push(n);
                }
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                binders.push(QuantBinder {
                    names,
                    ty: Some(Box::new(ty)),
                    bound: None,
                });
            }
        } else {
            let mut names = vec![self.ident("bound variable")?];
            while let Tok::Ident(n) = self.peek().clone() {
                self.bump();
                names.push(n);
            }
            let mut binder = QuantBinder {
                names,
                ty: None,
                bound: None,
            };
            match self.peek().clone() {
                Tok::Colon => {
                    self.bump();
                    binder.ty = Some(Box::new(self.expr(0)?));
                }
                Tok::Rel(r) => {
                    self.bump();
                    binder.bound = Some((r, Box::new(self.expr(0)?)));
                }
                _ => {}
            }
            binders.push(binder);
        }
        self.expect(Tok::Comma, "`,` after quantifier binder")?;
        let mut body = self.expr(0)?;
        for binder in binders.into_iter().rev() {
            body = Expr::Quantifier {
                kind,
                binder,
                body: Box::new(body),
            };
        }
        Ok(body)
    }

    fn integral(&mut self) -> Result<Expr, ParseError> {
        self.bump();
        let var = self.ident("integration variable")?;
        self.expect(Tok::Keyword(Keyword::In), "`in`")?;
        let lower = self.expr(0)?;
        self.expect(Tok::DotDot, "`..`")?;
        let upper = self.expr(0)?;
        self.expect(Tok::Comma, "`,`")?;
        let body = self.expr(INTEGRAL_LEVEL)?;
        Ok(Expr::Integral {
            var,
            lower: Box::new(lower),
            upper: Box::new(upper),
            body: Box::new(body),
        })
    }
}

enum Infix {
    Bin(BinOp),
    Rel(Rel),
}

const TYPE_NAMES: &[&str] = &[
    "ℝ", "ℕ", "ℤ", "ℚ", "ℂ", "Prop", "Type", "Type*", "Sort", "Bool", "Real", "Nat", "Int", "Rat",
    "Complex",
];
const TYPE_CTORS: &[&str] = &[
    "Set", "Finset", "Fin", "EuclideanSpace", "Matrix", "Polynomial", "List", "Multiset", "ZMod",
    "Option", "Type", "Sort",
];

fn is_sort(ty: &Expr) -> bool {
    match ty {
        Expr::Ident(n) => matches!(n.as_str(), "Type" | "Type*" | "Sort" | "Prop"),
        Expr::App { head, .. } => head == "Type" || head == "Sort",
        _ => false,
    }
}

/// Decides whether a binder group annotation is a type (so the group
/// introduces variables) rather than a proposition (a hypothesis).
fn is_type_like(ty: &Expr, type_vars: &HashSet<String>) -> bool {
    match ty {
        Expr::Ident(n) => TYPE_NAMES.contains(&n.as_str()) || type_vars.contains(n),
        Expr::App { head, .. } => TYPE_CTORS.contains(&head.as_str()),
        Expr::Binary {
            op: BinOp::Imp,
            lhs,
            rhs,
        } => is_type_like(lhs, type_vars) && is_type_like(rhs, type_vars),
        _ => false,
    }
}
