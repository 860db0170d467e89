//! Problem definitions: expressions, the JSON problem-file format and the two
//! built-in benchmark systems.
//!
//! Every equation has the fixed form `D^αⱼ uⱼ = rhsⱼ` with a Caputo derivative of
//! order `0 < αⱼ ≤ 1` on the left.

mod expr;
mod parse;
mod reference;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::FracOrder;
use crate::fracseries::RationalExp;

pub use expr::{eval_expr, Expr, IntegralKind, KernelMonomial};
pub use parse::parse_expr;
pub use reference::{Func, RefExpr};

const EXAMPLE1: &str = include_str!("../../problems/example1.json");
const EXAMPLE2: &str = include_str!("../../problems/example2.json");

/// Names accepted by [`builtin_document`].
pub const BUILTIN_NAMES: [&str; 2] = ["example1", "example2"];

/// JSON text of a built-in problem.
pub fn builtin_document(name: &str) -> Option<&'static str> {
    match name {
        "example1" => Some(EXAMPLE1),
        "example2" => Some(EXAMPLE2),
        _ => None,
    }
}

pub fn builtin(name: &str) -> Result<FideProblem> {
    let doc = builtin_document(name)
        .ok_or_else(|| Error::validation(format!("no built-in problem named {name:?}")))?;
    load_problem(doc)
}

/// A system of fractional integro-differential equations `D^αⱼ uⱼ = rhsⱼ`, `uⱼ(0) = initialⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FideProblem {
    pub name: String,
    pub unknowns: Vec<String>,
    pub orders: Vec<FracOrder>,
    pub initial: Vec<f64>,
    pub rhs: Vec<Expr>,
    pub reference: Option<Vec<RefExpr>>,
}

impl FideProblem {
    pub fn new(
        name: impl Into<String>,
        unknowns: Vec<String>,
        orders: Vec<FracOrder>,
        initial: Vec<f64>,
        rhs: Vec<Expr>,
        reference: Option<Vec<RefExpr>>,
    ) -> Result<Self> {
        let p = FideProblem {
            name: name.into(),
            unknowns,
            orders,
            initial,
            rhs,
            reference,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unknowns.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.unknowns.len();
        if n == 0 {
            return Err(Error::validation("a problem needs at least one unknown"));
        }
        if self.orders.len() != n || self.initial.len() != n || self.rhs.len() != n {
            return Err(Error::validation(format!(
                "length mismatch: {n} unknowns, {} orders, {} initial values, {} equations",
                self.orders.len(),
                self.initial.len(),
                self.rhs.len()
            )));
        }
        if let Some(r) = &self.reference {
            if r.len() != n {
                return Err(Error::validation(format!(
                    "{} reference solutions for {n} unknowns",
                    r.len()
                )));
            }
        }
        for (i, name) in self.unknowns.iter().enumerate() {
            if !is_valid_name(name) {
                return Err(Error::validation(format!("invalid unknown name {name:?}")));
            }
            if self.unknowns[..i].contains(name) {
                return Err(Error::validation(format!("duplicate unknown {name:?}")));
            }
        }
        if let Some(v) = self.initial.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite initial value {v}")));
        }
        for e in &self.rhs {
            e.validate(n)?;
        }
        Ok(())
    }

    /// Replaces all orders. A single order is broadcast to every unknown.
    pub fn with_orders(mut self, orders: &[FracOrder]) -> Result<Self> {
        match orders.len() {
            0 => {}
            1 => self.orders = vec![orders[0]; self.len()],
            n if n == self.len() => self.orders = orders.to_vec(),
            n => {
                return Err(Error::validation(format!(
                    "{n} orders given for {} unknowns",
                    self.len()
                )))
            }
        }
        Ok(self)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.unknowns.iter().position(|n| n == name)
    }
}

fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name != "t"
        && name != "d"
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub name: String,
    pub unknowns: Vec<String>,
    pub orders: Vec<String>,
    pub initial: Vec<f64>,
    pub equations: Vec<EquationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationDoc {
    pub unknown: String,
    pub rhs: String,
    pub integrals: Vec<IntegralDoc>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum IntegralType {
    Volterra,
    Fredholm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralDoc {
    #[serde(rename = "type")]
    pub kind: IntegralType,
    pub kernel: Vec<KernelDoc>,
    pub integrand: String,
    pub sign: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    pub coeff: f64,
    pub t_pow: String,
    pub s_pow: String,
    pub tms_pow: String,
}

/// Parses and validates a JSON problem document.
pub fn load_problem(document: &str) -> Result<FideProblem> {
    let doc: ProblemDoc =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    problem_from_doc(&doc)
}

pub fn problem_from_doc(doc: &ProblemDoc) -> Result<FideProblem> {
    let n = doc.unknowns.len();
    if doc.orders.len() != n || doc.initial.len() != n || doc.equations.len() != n {
        return Err(Error::validation(format!(
            "length mismatch: {n} unknowns, {} orders, {} initial values, {} equations",
            doc.orders.len(),
            doc.initial.len(),
            doc.equations.len()
        )));
    }
    let orders = doc
        .orders
        .iter()
        .map(|s| s.parse::<FracOrder>())
        .collect::<Result<Vec<_>>>()?;

    let mut rhs: Vec<Option<Expr>> = vec![None; n];
    for eq in &doc.equations {
        let j = doc
            .unknowns
            .iter()
            .position(|u| *u == eq.unknown)
            .ok_or_else(|| Error::validation(format!("equation for undeclared unknown {:?}", eq.unknown)))?;
        if rhs[j].is_some() {
            return Err(Error::validation(format!("two equations for {:?}", eq.unknown)));
        }
        rhs[j] = Some(equation_rhs(eq, &doc.unknowns)?);
    }
    let rhs = rhs
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::validation("every unknown needs exactly one equation"))?;

    let reference = doc
        .reference
        .as_ref()
        .map(|r| r.iter().map(|s| RefExpr::parse(s)).collect::<Result<Vec<_>>>())
        .transpose()?;

    FideProblem::new(
        doc.name.clone(),
        doc.unknowns.clone(),
        orders,
        doc.initial.clone(),
        rhs,
        reference,
    )
}

fn equation_rhs(eq: &EquationDoc, unknowns: &[String]) -> Result<Expr> {
    let base = parse_expr(&eq.rhs, unknowns)?;
    let mut items = match base {
        Expr::Sum(items) => items,
        other => vec![other],
    };
    for integral in &eq.integrals {
        let kernel = integral
            .kernel
            .iter()
            .map(|k| {
                KernelMonomial::new(
                    k.coeff,
                    k.t_pow.parse()?,
                    k.s_pow.parse()?,
                    k.tms_pow.parse::<RationalExp>()?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let integrand = parse_expr(&integral.integrand, unknowns)?;
        let kind = match integral.kind {
            IntegralType::Volterra => IntegralKind::Volterra,
            IntegralType::Fredholm => IntegralKind::Fredholm,
        };
        let node = Expr::integral(kind, kernel, integrand);
        items.push(match integral.sign {
            1 => node,
            -1 => node.negate(),
            s => return Err(Error::validation(format!("integral sign must be 1 or -1, got {s}"))),
        });
    }
    Ok(if items.len() == 1 {
        items.pop().unwrap()
    } else {
        Expr::Sum(items)
    })
}
