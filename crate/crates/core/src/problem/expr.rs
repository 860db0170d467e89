use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fraccalc::beta;
use crate::fracseries::{FracSeries, RationalExp, Term};

/// One kernel term `coeff · t^t_pow · s^s_pow · (t-s)^tms_pow`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMonomial {
    pub coeff: f64,
    pub t_pow: RationalExp,
    pub s_pow: RationalExp,
    pub tms_pow: RationalExp,
}

impl KernelMonomial {
    pub fn new(coeff: f64, t_pow: RationalExp, s_pow: RationalExp, tms_pow: RationalExp) -> Result<Self> {
        let k = KernelMonomial {
            coeff,
            t_pow,
            s_pow,
            tms_pow,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeff == 0.0 || !self.coeff.is_finite() {
            return Err(Error::validation("kernel coefficient must be finite and nonzero"));
        }
        if self.t_pow.is_negative() || self.s_pow.is_negative() {
            return Err(Error::validation("kernel powers of t and s must be >= 0"));
        }
        if self.tms_pow <= RationalExp::integer(-1) {
            return Err(Error::validation("kernel power of (t-s) must be > -1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralKind {
    /// `∫₀ᵗ`
    Volterra,
    /// `∫₀¹`
    Fredholm,
}

/// Right-hand-side expression over the unknowns of a system.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    TPow(RationalExp),
    Unknown(usize),
    UnknownDeriv(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    IntPow(Box<Expr>, u32),
    Volterra {
        kernel: Vec<KernelMonomial>,
        integrand: Box<Expr>,
    },
    Fredholm {
        kernel: Vec<KernelMonomial>,
        integrand: Box<Expr>,
    },
}

impl Expr {
    pub fn integral(kind: IntegralKind, kernel: Vec<KernelMonomial>, integrand: Expr) -> Expr {
        let integrand = Box::new(integrand);
        match kind {
            IntegralKind::Volterra => Expr::Volterra { kernel, integrand },
            IntegralKind::Fredholm => Expr::Fredholm { kernel, integrand },
        }
    }

    /// True when some `Unknown`/`UnknownDeriv` node occurs anywhere below.
    pub fn depends_on_unknowns(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::TPow(_) => false,
            Expr::Unknown(_) | Expr::UnknownDeriv(_) => true,
            Expr::Sum(items) | Expr::Product(items) => items.iter().any(Expr::depends_on_unknowns),
            Expr::IntPow(base, _) => base.depends_on_unknowns(),
            Expr::Volterra { integrand, .. } | Expr::Fredholm { integrand, .. } => {
                integrand.depends_on_unknowns()
            }
        }
    }

    fn contains_integral_or_deriv(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::TPow(_) | Expr::Unknown(_) => false,
            Expr::UnknownDeriv(_) | Expr::Volterra { .. } | Expr::Fredholm { .. } => true,
            Expr::Sum(items) | Expr::Product(items) => items.iter().any(Expr::contains_integral_or_deriv),
            Expr::IntPow(base, _) => base.contains_integral_or_deriv(),
        }
    }

    /// Checks indices and the integrand restrictions.
    pub fn validate(&self, n_unknowns: usize) -> Result<()> {
        match self {
            Expr::Const(c) if !c.is_finite() => Err(Error::validation("non-finite constant")),
            Expr::Const(_) => Ok(()),
            Expr::TPow(e) if e.is_negative() => Err(Error::validation(format!(
                "negative power t^({e}) is not allowed"
            ))),
            Expr::TPow(_) => Ok(()),
            Expr::Unknown(i) | Expr::UnknownDeriv(i) if *i >= n_unknowns => Err(Error::validation(
                format!("unknown index {i} out of range ({n_unknowns} unknowns)"),
            )),
            Expr::Unknown(_) | Expr::UnknownDeriv(_) => Ok(()),
            Expr::Sum(items) | Expr::Product(items) => {
                if items.is_empty() {
                    return Err(Error::validation("empty sum or product"));
                }
                items.iter().try_for_each(|e| e.validate(n_unknowns))
            }
            Expr::IntPow(base, k) => {
                if *k == 0 {
                    return Err(Error::validation("integer power must be positive"));
                }
                base.validate(n_unknowns)
            }
            Expr::Volterra { kernel, integrand } | Expr::Fredholm { kernel, integrand } => {
                if kernel.is_empty() {
                    return Err(Error::validation("integral with an empty kernel"));
                }
                for k in kernel {
                    k.validate()?;
                    if matches!(self, Expr::Fredholm { .. }) && !k.tms_pow.is_zero() {
                        return Err(Error::validation(
                            "Fredholm kernels must be separable (tms_pow = 0)",
                        ));
                    }
                }
                if integrand.contains_integral_or_deriv() {
                    return Err(Error::validation(
                        "integrands may depend on u(s) only: no derivatives or nested integrals",
                    ));
                }
                integrand.validate(n_unknowns)
            }
        }
    }

    /// Renders in the parser's grammar. Integral nodes have no surface syntax and
    /// are written as `volterra[kernel](integrand)` / `fredholm[kernel](integrand)`.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        self.render_into(names, &mut out);
        out
    }

    fn render_into(&self, names: &[String], out: &mut String) {
        match self {
            Expr::Const(c) => {
                let _ = write!(out, "{c}");
            }
            Expr::TPow(e) => out.push_str(&render_tpow(*e)),
            Expr::Unknown(i) => out.push_str(name_of(names, *i)),
            Expr::UnknownDeriv(i) => {
                let _ = write!(out, "d({})", name_of(names, *i));
            }
            Expr::Sum(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i == 0 {
                        render_operand(item, names, out, OperandPos::SumHead);
                        continue;
                    }
                    match item.negated_leading_const() {
                        Some(positive) => {
                            out.push_str(" - ");
                            render_operand(&positive, names, out, OperandPos::SumTail);
                        }
                        None => {
                            out.push_str(" + ");
                            render_operand(item, names, out, OperandPos::SumTail);
                        }
                    }
                }
            }
            Expr::Product(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push('*');
                    }
                    let pos = if i == 0 { OperandPos::ProductHead } else { OperandPos::ProductTail };
                    render_operand(item, names, out, pos);
                }
            }
            Expr::IntPow(base, k) => {
                let simple = matches!(
                    **base,
                    Expr::Unknown(_) | Expr::UnknownDeriv(_)
                ) || matches!(**base, Expr::Const(c) if c >= 0.0);
                if simple {
                    base.render_into(names, out);
                } else {
                    out.push('(');
                    base.render_into(names, out);
                    out.push(')');
                }
                let _ = write!(out, "^{k}");
            }
            Expr::Volterra { kernel, integrand } | Expr::Fredholm { kernel, integrand } => {
                out.push_str(if matches!(self, Expr::Volterra { .. }) {
                    "volterra["
                } else {
                    "fredholm["
                });
                for (i, k) in kernel.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    let _ = write!(
                        out,
                        "{}*t^({})*s^({})*(t-s)^({})",
                        k.coeff, k.t_pow, k.s_pow, k.tms_pow
                    );
                }
                out.push_str("](");
                integrand.render_into(names, out);
                out.push(')');
            }
        }
    }

    /// If this is `Const(c<0)` or a product led by one, the same term with `|c|`.
    fn negated_leading_const(&self) -> Option<Expr> {
        match self {
            Expr::Const(c) if *c < 0.0 => Some(Expr::Const(-c)),
            Expr::Product(items) => match items.first() {
                Some(Expr::Const(c)) if *c < 0.0 => {
                    let mut items = items.clone();
                    items[0] = Expr::Const(-c);
                    Some(Expr::Product(items))
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// Arithmetic negation with the folding the parser applies to `-x`.
    pub(crate) fn negate(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Product(mut items) => {
                if let Some(Expr::Const(c)) = items.first_mut() {
                    *c = -*c;
                    Expr::Product(items)
                } else {
                    items.insert(0, Expr::Const(-1.0));
                    Expr::Product(items)
                }
            }
            other => Expr::Product(vec![Expr::Const(-1.0), other]),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum OperandPos {
    SumHead,
    SumTail,
    ProductHead,
    ProductTail,
}

fn render_operand(e: &Expr, names: &[String], out: &mut String, pos: OperandPos) {
    let needs_parens = match e {
        Expr::Sum(_) => true,
        Expr::Product(_) => matches!(pos, OperandPos::ProductHead | OperandPos::ProductTail),
        Expr::Const(c) if *c < 0.0 => matches!(pos, OperandPos::SumTail | OperandPos::ProductTail),
        _ => false,
    };
    if needs_parens {
        out.push('(');
        e.render_into(names, out);
        out.push(')');
    } else {
        e.render_into(names, out);
    }
}

fn render_tpow(e: RationalExp) -> String {
    match (e.num(), e.den()) {
        (1, 1) => "t".into(),
        (n, 1) => format!("t^{n}"),
        _ => format!("t^({e})"),
    }
}

fn name_of(names: &[String], i: usize) -> &str {
    names.get(i).map(String::as_str).unwrap_or("?")
}

/// Evaluates `e` exactly on the current iterates.
///
/// Volterra node `c·t^a s^b (t-s)^g` on integrand term `d·s^β` yields
/// `c·d·B(g+1, b+β+1)·t^(a+g+b+β+1)`; Fredholm node on `[0, 1]` yields
/// `c·d/(b+β+1)·t^a`.
pub fn eval_expr(e: &Expr, state: &[FracSeries]) -> Result<FracSeries> {
    let lookup = |i: usize| {
        state
            .get(i)
            .ok_or_else(|| Error::validation(format!("no state for unknown index {i}")))
    };
    match e {
        Expr::Const(c) => Ok(FracSeries::constant(*c)),
        Expr::TPow(p) => Ok(FracSeries::monomial(1.0, *p)),
        Expr::Unknown(i) => lookup(*i).cloned(),
        Expr::UnknownDeriv(i) => lookup(*i)?.derivative(),
        Expr::Sum(items) => items
            .iter()
            .try_fold(FracSeries::zero(), |acc, x| Ok(acc.add(&eval_expr(x, state)?))),
        Expr::Product(items) => items
            .iter()
            .try_fold(FracSeries::constant(1.0), |acc, x| Ok(acc.mul(&eval_expr(x, state)?))),
        Expr::IntPow(base, k) => Ok(eval_expr(base, state)?.powi(*k)),
        Expr::Volterra { kernel, integrand } => {
            let p = eval_expr(integrand, state)?;
            volterra_closed_form(kernel, &p)
        }
        Expr::Fredholm { kernel, integrand } => {
            let p = eval_expr(integrand, state)?;
            fredholm_closed_form(kernel, &p)
        }
    }
}

fn volterra_closed_form(kernel: &[KernelMonomial], p: &FracSeries) -> Result<FracSeries> {
    let mut out = Vec::with_capacity(kernel.len() * p.len());
    for k in kernel {
        let g1 = k.tms_pow.to_f64() + 1.0;
        for term in p.terms() {
            let inner = k.s_pow + term.exp;
            if inner <= RationalExp::integer(-1) {
                return Err(Error::domain(format!(
                    "Volterra integrand s^({inner}) is not integrable at 0"
                )));
            }
            let b = beta(g1, inner.to_f64() + 1.0)?;
            let exp = k.t_pow + k.tms_pow + inner + RationalExp::ONE;
            out.push(Term::new(k.coeff * term.coeff * b, exp));
        }
    }
    Ok(FracSeries::normalize(out))
}

fn fredholm_closed_form(kernel: &[KernelMonomial], p: &FracSeries) -> Result<FracSeries> {
    let mut out = Vec::with_capacity(kernel.len());
    for k in kernel {
        if !k.tms_pow.is_zero() {
            return Err(Error::domain("Fredholm kernel with a (t-s) factor"));
        }
        let mut moment = 0.0;
        for term in p.terms() {
            let e = k.s_pow + term.exp + RationalExp::ONE;
            if !e.is_positive() {
                return Err(Error::domain(format!(
                    "Fredholm integrand s^({}) is not integrable at 0",
                    k.s_pow + term.exp
                )));
            }
            moment += term.coeff / e.to_f64();
        }
        out.push(Term::new(k.coeff * moment, k.t_pow));
    }
    Ok(FracSeries::normalize(out))
}
