use std::fmt;

use super::ast::{BinOp, Expr, Func, Var};

const MAX_DEPTH: usize = 200;

/// Syntax error with the byte offset where parsing stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: expected ", self.offset)?;
        match self.expected.as_slice() {
            [] => write!(f, "nothing")?,
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(c) => format!("number `{c}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
                i = scan_number(bytes, i);
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: vec!["number".into()],
                    found: format!("malformed literal `{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError {
                        offset: start,
                        expected: vec!["finite number".into()],
                        found: format!("literal `{text}`"),
                    });
                }
                out.push((Tok::Num(value), start));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    expected: vec!["operator, number, variable or function".into()],
                    found: format!("character `{ch}`"),
                });
            }
        }
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    nesting: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn too_deep(&self) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: vec![format!("nesting depth at most {MAX_DEPTH}")],
            found: "deeper nesting".into(),
        }
    }

    // Every production returns the depth of the tree it built; recursion is
    // bounded by that depth, so evaluation and drop stay shallow too.
    fn node(&self, depth: usize) -> Result<usize, ParseError> {
        if depth > MAX_DEPTH {
            Err(self.too_deep())
        } else {
            Ok(depth)
        }
    }

    fn expr(&mut self) -> Result<(Expr, usize), ParseError> {
        let (mut lhs, mut depth) = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let (rhs, rd) = self.term()?;
            depth = self.node(1 + depth.max(rd))?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok((lhs, depth))
    }

    fn term(&mut self) -> Result<(Expr, usize), ParseError> {
        let (mut lhs, mut depth) = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let (rhs, rd) = self.unary()?;
            depth = self.node(1 + depth.max(rd))?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok((lhs, depth))
    }

    fn unary(&mut self) -> Result<(Expr, usize), ParseError> {
        if *self.peek() != Tok::Minus {
            return self.power();
        }
        self.bump();
        if let Tok::Num(c) = *self.peek() {
            if *self.peek_at(1) != Tok::Caret {
                self.bump();
                return Ok((Expr::Num(-c), 1));
            }
        }
        self.guard()?;
        let (inner, d) = self.unary()?;
        self.nesting -= 1;
        Ok((Expr::Neg(Box::new(inner)), self.node(d + 1)?))
    }

    fn power(&mut self) -> Result<(Expr, usize), ParseError> {
        let (base, bd) = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            self.guard()?;
            let (exponent, ed) = self.unary()?;
            self.nesting -= 1;
            let depth = self.node(1 + bd.max(ed))?;
            return Ok((Expr::bin(BinOp::Pow, base, exponent), depth));
        }
        Ok((base, bd))
    }

    // Bounds the parser's own recursion, which can run ahead of tree depth
    // (parentheses add recursion but no nodes).
    fn guard(&mut self) -> Result<(), ParseError> {
        self.nesting += 1;
        if self.nesting > MAX_DEPTH {
            return Err(self.too_deep());
        }
        Ok(())
    }

    fn primary(&mut self) -> Result<(Expr, usize), ParseError> {
        const START: &[&str] = &["number", "variable", "function", "`(`", "`-`"];
        match self.peek().clone() {
            Tok::Num(c) => {
                self.bump();
                Ok((Expr::Num(c), 1))
            }
            Tok::LParen => {
                self.bump();
                self.guard()?;
                let inner = self.expr()?;
                self.nesting -= 1;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(var) = parse_var(&name) {
                    self.bump();
                    return Ok((Expr::Var(var), 1));
                }
                if let Some(func) = Func::from_name(&name) {
                    self.bump();
                    if *self.peek() != Tok::LParen {
                        return Err(self.error(&["`(`"]));
                    }
                    self.bump();
                    self.guard()?;
                    let (arg, d) = self.expr()?;
                    self.nesting -= 1;
                    self.expect_rparen()?;
                    return Ok((Expr::call(func, arg), self.node(d + 1)?));
                }
                let mut expected: Vec<String> = vec!["t".into(), "x<index>".into()];
                expected.extend(Func::ALL.iter().map(|f| f.name().to_string()));
                Err(ParseError {
                    offset: self.offset(),
                    expected,
                    found: self.peek().describe(),
                })
            }
            _ => Err(self.error(START)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&["`)`", "operator"]))
        }
    }
}

fn parse_var(name: &str) -> Option<Var> {
    if name == "t" {
        return Some(Var::T);
    }
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse::<u32>().ok().map(Var::X)
}

/// Parses an expression; the whole input must be consumed.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        nesting: 0,
    };
    let (expr, _) = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error(&["operator", "end of input"]));
    }
    Ok(expr)
}
