use super::ast::{BinOp, Rel};
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(String),
    Keyword(Keyword),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    ColonEq,
    Comma,
    DotDot,
    /// ASCII `|`: absolute value delimiter, or divisibility in infix position.
    Bar,
    Bin(BinOp),
    Rel(Rel),
    Not,
    /// `-`: subtraction or negation depending on position.
    Minus,
    Forall,
    Exists,
    Integral,
    Other(char),
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Theorem,
    Lemma,
    Def,
    By,
    Fun,
    Match,
    In,
    Let,
    Have,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Num(s) => s.clone(),
            Tok::Keyword(k) => format!("{k:?}").to_lowercase(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBrace => "{".into(),
            Tok::RBrace => "}".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::Colon => ":".into(),
            Tok::ColonEq => ":=".into(),
            Tok::Comma => ",".into(),
            Tok::DotDot => "..".into(),
            Tok::Bar => "|".into(),
            Tok::Bin(op) => op.symbol().into(),
            Tok::Rel(r) => r.symbol().into(),
            Tok::Not => "¬".into(),
            Tok::Minus => "-".into(),
            Tok::Forall => "∀".into(),
            Tok::Exists => "∃".into(),
            Tok::Integral => "∫".into(),
            Tok::Other(c) => c.to_string(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    /// Byte offset into the original source.
    pub start: usize,
}

fn is_ident_start(c: char) -> bool {
    (c.is_alphabetic() || c == '_') && !matches!(c, 'λ' | 'Π' | 'Σ')
}

fn is_ident_continue(c: char) -> bool {
    is_ident_start(c) || c.is_alphanumeric() || matches!(c, '\'' | '!' | '?')
}

/// Tokenizes `src[from..]`. Offsets in the returned tokens are absolute.
pub fn tokenize(src: &str, from: usize) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        src,
        pos: from,
        out: Vec::new(),
    };
    lx.run()?;
    Ok(lx.out)
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    out: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek2(&self) -> Option<char> {
        self.rest().chars().nth(1)
    }

    fn push(&mut self, tok: Tok, start: usize) {
        self.out.push(Token {
            tok,
            start,
        });
    }

    fn run(&mut self) -> Result<(), ParseError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            if c.is_whitespace() {
                self.pos += c.len_utf8();
                continue;
            }
            if self.rest().starts_with("--") {
                let len = self.rest().find('\n').unwrap_or(self.rest().len());
                self.pos += len;
                continue;
            }
            if self.rest().starts_with("/-") {
                self.skip_block_comment()?;
                continue;
            }
            if c.is_ascii_digit() {
                self.number();
                continue;
            }
            if is_ident_start(c) {
                self.ident();
                continue;
            }
            // longest-match symbols first
            const SYMBOLS: &[(&str, Tok)] = &[
                ("<->", Tok::Bin(BinOp::Iff)),
                (":=", Tok::ColonEq),
                ("->", Tok::Bin(BinOp::Imp)),
                ("<=", Tok::Rel(Rel::Le)),
                (">=", Tok::Rel(Rel::Ge)),
                ("/\\", Tok::Bin(BinOp::And)),
                ("\\/", Tok::Bin(BinOp::Or)),
                ("..", Tok::DotDot),
            ];
            if let Some((s, tok)) = SYMBOLS.iter().find(|(s, _)| self.rest().starts_with(s)) {
                self.pos += s.len();
                self.push(tok.clone(), start);
                continue;
            }
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ':' => Tok::Colon,
                ',' => Tok::Comma,
                '|' => Tok::Bar,
                '+' => Tok::Bin(BinOp::Add),
                '-' | '−' => Tok::Minus,
                '*' => Tok::Bin(BinOp::Mul),
                '/' => Tok::Bin(BinOp::Div),
                '%' => Tok::Bin(BinOp::Mod),
                '^' => Tok::Bin(BinOp::Pow),
                '•' => Tok::Bin(BinOp::SMul),
                '∣' => Tok::Bin(BinOp::Dvd),
                '∧' => Tok::Bin(BinOp::And),
                '∨' => Tok::Bin(BinOp::Or),
                '→' => Tok::Bin(BinOp::Imp),
                '↔' => Tok::Bin(BinOp::Iff),
                '=' => Tok::Rel(Rel::Eq),
                '≠' => Tok::Rel(Rel::Ne),
                '<' => Tok::Rel(Rel::Lt),
                '≤' => Tok::Rel(Rel::Le),
                '>' => Tok::Rel(Rel::Gt),
                '≥' => Tok::Rel(Rel::Ge),
                '∈' => Tok::Rel(Rel::Mem),
                '∉' => Tok::Rel(Rel::NotMem),
                '¬' => Tok::Not,
                '∀' => Tok::Forall,
                '∃' => Tok::Exists,
                '∫' => Tok::Integral,
                other => Tok::Other(other),
            };
            self.pos += c.len_utf8();
            self.push(tok, start);
        }
        let end = self.src.len();
        self.out.push(Token {
            tok: Tok::Eof,
            start: end,
        });
        Ok(())
    }

    fn skip_block_comment(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let mut depth = 0usize;
        while !self.rest().is_empty() {
            if self.rest().starts_with("/-") {
                depth += 1;
                self.pos += 2;
            } else if self.rest().starts_with("-/") {
                depth -= 1;
                self.pos += 2;
                if depth == 0 {
                    return Ok(());
                }
            } else {
                self.pos += self.peek().map_or(1, char::len_utf8);
            }
        }
        Err(ParseError::at(self.src, start, "end of block comment `-/`", "end of input"))
    }

    fn number(&mut self) {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        // `0..1` is a range, `0.5` a decimal
        if self.peek() == Some('.') && self.peek2().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text = self.src[start..self.pos].to_string();
        self.push(Tok::Num(text), start);
    }

    fn ident(&mut self) {
        let start = self.pos;
        loop {
            while let Some(c) = self.peek() {
                if is_ident_continue(c) {
                    self.pos += c.len_utf8();
                } else {
                    break;
                }
            }
            if self.peek() == Some('.') && self.peek2().is_some_and(is_ident_start) {
                self.pos += 1;
                continue;
            }
            break;
        }
        let mut text = self.src[start..self.pos].to_string();
        if text == "Type" && self.peek() == Some('*') {
            self.pos += 1;
            text.push('*');
        }
        let tok = match text.as_str() {
            "theorem" => Tok::Keyword(Keyword::Theorem),
            "lemma" => Tok::Keyword(Keyword::Lemma),
            "def" | "abbrev" | "instance" | "structure" | "inductive" => {
                Tok::Keyword(Keyword::Def)
            }
            "by" => Tok::Keyword(Keyword::By),
            "fun" => Tok::Keyword(Keyword::Fun),
            "match" => Tok::Keyword(Keyword::Match),
            "in" => Tok::Keyword(Keyword::In),
            "let" => Tok::Keyword(Keyword::Let),
            "have" => Tok::Keyword(Keyword::Have),
            "forall" => Tok::Forall,
            _ => Tok::Ident(text),
        };
        self.push(tok, start);
    }
}
