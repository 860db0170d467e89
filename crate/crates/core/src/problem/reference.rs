use std::fmt;

use crate::error::{Error, Result};

use super::parse::{Cursor, Tok};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sinh,
    Cosh,
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    T,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Closed-form reference solution in `t`, e.g. `sinh(t)` or `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefExpr {
    source: String,
    root: Node,
}

impl RefExpr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut cur = Cursor::new(src)?;
        if cur.peek().is_none() {
            return Err(Error::parse(0, "empty reference expression"));
        }
        let root = sum(&mut cur)?;
        cur.finish()?;
        let r = RefExpr {
            source: src.trim().to_string(),
            root,
        };
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            if !r.eval(t).is_finite() {
                return Err(Error::validation(format!(
                    "reference {src:?} is not finite at t = {t}"
                )));
            }
        }
        Ok(r)
    }

    pub fn eval(&self, t: f64) -> f64 {
        eval(&self.root, t)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Display for RefExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn eval(n: &Node, t: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::T => t,
        Node::Neg(a) => -eval(a, t),
        Node::Add(a, b) => eval(a, t) + eval(b, t),
        Node::Sub(a, b) => eval(a, t) - eval(b, t),
        Node::Mul(a, b) => eval(a, t) * eval(b, t),
        Node::Div(a, b) => eval(a, t) / eval(b, t),
        Node::Pow(a, b) => eval(a, t).powf(eval(b, t)),
        Node::Call(f, a) => f.apply(eval(a, t)),
    }
}

fn sum(cur: &mut Cursor) -> Result<Node> {
    let mut lhs = product(cur)?;
    loop {
        if cur.eat(&Tok::Plus) {
            lhs = Node::Add(Box::new(lhs), Box::new(product(cur)?));
        } else if cur.eat(&Tok::Minus) {
            lhs = Node::Sub(Box::new(lhs), Box::new(product(cur)?));
        } else {
            return Ok(lhs);
        }
    }
}

fn product(cur: &mut Cursor) -> Result<Node> {
    let mut lhs = unary(cur)?;
    loop {
        if cur.eat(&Tok::Star) {
            lhs = Node::Mul(Box::new(lhs), Box::new(unary(cur)?));
        } else if cur.eat(&Tok::Slash) {
            lhs = Node::Div(Box::new(lhs), Box::new(unary(cur)?));
        } else {
            return Ok(lhs);
        }
    }
}

fn unary(cur: &mut Cursor) -> Result<Node> {
    if cur.eat(&Tok::Minus) {
        return Ok(Node::Neg(Box::new(unary(cur)?)));
    }
    let base = atom(cur)?;
    if cur.eat(&Tok::Caret) {
        // right associative, binds tighter than unary minus on the left
        return Ok(Node::Pow(Box::new(base), Box::new(unary(cur)?)));
    }
    Ok(base)
}

fn atom(cur: &mut Cursor) -> Result<Node> {
    match cur.peek().cloned() {
        Some(Tok::Num(v)) => {
            cur.next();
            Ok(Node::Num(v))
        }
        Some(Tok::LParen) => {
            cur.next();
            let e = sum(cur)?;
            cur.expect(&Tok::RParen, "')'")?;
            Ok(e)
        }
        Some(Tok::Ident(name)) => {
            if name == "t" {
                cur.next();
                return Ok(Node::T);
            }
            if name == "pi" {
                cur.next();
                return Ok(Node::Num(std::f64::consts::PI));
            }
            match Func::from_name(&name) {
                Some(f) if cur.peek2() == Some(&Tok::LParen) => {
                    cur.next();
                    cur.next();
                    let arg = sum(cur)?;
                    cur.expect(&Tok::RParen, "')' closing the function call")?;
                    Ok(Node::Call(f, Box::new(arg)))
                }
                _ => Err(cur.error(format!("unknown symbol {name:?} in reference expression"))),
            }
        }
        _ => Err(cur.error("expected a number, t, a function call or '('")),
    }
}
