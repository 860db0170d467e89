//! Recursive-descent parser for right-hand-side expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*          division only by numeric constants
//! unary  := '-' unary | power
//! power  := 't' ('^' rexp)? | atom ('^' posint)?
//! atom   := number | name | 'd' '(' name ')' | '(' expr ')'
//! rexp   := int | '(' ['-'] int ['/' int] ')'
//! posint := int | '(' int ')'
//! ```
//!
//! Integrals are not part of this grammar; problem files declare them structurally.

use crate::error::{Error, Result};
use crate::fracseries::RationalExp;

use super::expr::Expr;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, offset: start });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
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
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::parse(start, format!("malformed number {text:?}")))?;
            out.push(Token {
                tok: Tok::Num(v),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        let ch = src[start..].chars().next().unwrap_or('?');
        return Err(Error::parse(start, format!("unexpected character {ch:?}")));
    }
    Ok(out)
}

/// Token cursor shared by both expression grammars.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self> {
        Ok(Cursor {
            tokens: tokenize(src)?,
            pos: 0,
            end: src.len(),
        })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|t| &t.tok)
    }

    pub fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.offset).unwrap_or(self.end)
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        let msg = msg.into();
        match self.tokens.get(self.pos) {
            Some(t) => Error::parse(t.offset, format!("{msg}, found {:?}", t.tok)),
            None => Error::parse(self.end, format!("{msg}, found end of input")),
        }
    }

    pub fn finish(&self) -> Result<()> {
        if self.pos < self.tokens.len() {
            Err(self.error("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    fn integer(&mut self) -> Result<i64> {
        match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < 1e15 => {
                let v = *v as i64;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error("expected an integer")),
        }
    }
}

/// Parses `src` against the given unknown names.
pub fn parse_expr(src: &str, unknowns: &[String]) -> Result<Expr> {
    let mut p = ExprParser {
        cur: Cursor::new(src)?,
        names: unknowns,
    };
    if p.cur.peek().is_none() {
        return Err(Error::parse(0, "empty expression"));
    }
    let e = p.expr()?;
    p.cur.finish()?;
    e.validate(unknowns.len())?;
    Ok(e)
}

struct ExprParser<'a> {
    cur: Cursor,
    names: &'a [String],
}

impl ExprParser<'_> {
    fn expr(&mut self) -> Result<Expr> {
        let mut items = vec![self.term()?];
        loop {
            if self.cur.eat(&Tok::Plus) {
                items.push(self.term()?);
            } else if self.cur.eat(&Tok::Minus) {
                items.push(self.term()?.negate());
            } else {
                break;
            }
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Expr::Sum(items)
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.cur.eat(&Tok::Star) {
                factors.push(self.unary()?);
            } else if self.cur.peek() == Some(&Tok::Slash) {
                let at = self.cur.offset();
                self.cur.next();
                let divisor = match self.unary()? {
                    Expr::Const(c) if c != 0.0 => c,
                    Expr::Const(_) => return Err(Error::parse(at, "division by zero")),
                    _ => return Err(Error::parse(at, "division is only supported by numeric constants")),
                };
                match factors.last_mut() {
                    Some(Expr::Const(c)) => *c /= divisor,
                    _ => factors.push(Expr::Const(1.0 / divisor)),
                }
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.cur.eat(&Tok::Minus) {
            return Ok(self.unary()?.negate());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        if let Some(Tok::Ident(name)) = self.cur.peek() {
            if name == "t" {
                self.cur.next();
                if self.cur.eat(&Tok::Caret) {
                    return Ok(Expr::TPow(self.rational_exponent()?));
                }
                return Ok(Expr::TPow(RationalExp::ONE));
            }
        }
        let base = self.atom()?;
        if self.cur.eat(&Tok::Caret) {
            let k = self.positive_int()?;
            return Ok(Expr::IntPow(Box::new(base), k));
        }
        Ok(base)
    }

    fn rational_exponent(&mut self) -> Result<RationalExp> {
        if self.cur.eat(&Tok::LParen) {
            let neg = self.cur.eat(&Tok::Minus);
            let num = self.cur.integer()?;
            let den = if self.cur.eat(&Tok::Slash) {
                let at = self.cur.offset();
                let d = self.cur.integer()?;
                if d <= 0 {
                    return Err(Error::parse(at, "exponent denominator must be positive"));
                }
                d
            } else {
                1
            };
            self.cur.expect(&Tok::RParen, "')' closing the exponent")?;
            RationalExp::new(if neg { -num } else { num }, den)
        } else {
            Ok(RationalExp::integer(self.cur.integer()?))
        }
    }

    fn positive_int(&mut self) -> Result<u32> {
        let at = self.cur.offset();
        let k = if self.cur.eat(&Tok::LParen) {
            let k = self.cur.integer()?;
            self.cur.expect(&Tok::RParen, "')'")?;
            k
        } else {
            self.cur.integer()?
        };
        if k < 1 || k > u32::MAX as i64 {
            return Err(Error::parse(at, "power must be a positive integer"));
        }
        Ok(k as u32)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.cur.offset();
        match self.cur.next() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.cur.expect(&Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) if name == "d" && self.cur.peek() == Some(&Tok::LParen) => {
                self.cur.next();
                let name_at = self.cur.offset();
                let target = match self.cur.next() {
                    Some(Tok::Ident(n)) => n,
                    _ => return Err(Error::parse(name_at, "expected an unknown name inside d(...)")),
                };
                let idx = self.lookup(&target, name_at)?;
                self.cur.expect(&Tok::RParen, "')' closing d(...)")?;
                Ok(Expr::UnknownDeriv(idx))
            }
            Some(Tok::Ident(name)) => Ok(Expr::Unknown(self.lookup(&name, at)?)),
            Some(_) => {
                self.cur.pos -= 1;
                Err(self.cur.error("expected a number, name or '('"))
            }
            None => Err(Error::parse(at, "unexpected end of input")),
        }
    }

    fn lookup(&self, name: &str, _at: usize) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::validation(format!("unknown name {name:?}")))
    }
}
