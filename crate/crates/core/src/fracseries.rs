//! Finite fractional power series `Σ cᵢ·t^βᵢ` with exact rational exponents.
//!
//! Every iterate, residual and forcing term handled by the solver lives in this
//! class. Exponents are kept as reduced rationals so that terms such as
//! `t^(3-2α)` produced along different paths merge exactly; coefficients are
//! `f64` because Gamma-function values are irrational anyway.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Coefficients smaller than this in magnitude are dropped by [`FracSeries::normalize`].
pub const DEFAULT_PRUNE_TOL: f64 = 1e-15;

/// Exact rational exponent, always stored in lowest terms with a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalExp(Ratio<i64>);

impl RationalExp {
    pub const ZERO: RationalExp = RationalExp(Ratio::new_raw(0, 1));
    pub const ONE: RationalExp = RationalExp(Ratio::new_raw(1, 1));

    /// Builds `num/den`, reducing it. Fails on a zero denominator.
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::validation("rational exponent with zero denominator"));
        }
        Ok(RationalExp(Ratio::new(num, den)))
    }

    pub fn integer(n: i64) -> Self {
        RationalExp(Ratio::from_integer(n))
    }

    pub fn num(&self) -> i64 {
        *self.0.numer()
    }

    pub fn den(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.num() as f64 / self.den() as f64
    }

    pub fn is_zero(&self) -> bool {
        self.num() == 0
    }

    pub fn is_positive(&self) -> bool {
        self.num() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.num() < 0
    }
}

impl From<i64> for RationalExp {
    fn from(n: i64) -> Self {
        RationalExp::integer(n)
    }
}

impl Add for RationalExp {
    type Output = RationalExp;
    fn add(self, rhs: Self) -> Self {
        RationalExp(self.0 + rhs.0)
    }
}

impl Sub for RationalExp {
    type Output = RationalExp;
    fn sub(self, rhs: Self) -> Self {
        RationalExp(self.0 - rhs.0)
    }
}

impl Neg for RationalExp {
    type Output = RationalExp;
    fn neg(self) -> Self {
        RationalExp(-self.0)
    }
}

impl Mul for RationalExp {
    type Output = RationalExp;
    fn mul(self, rhs: Self) -> Self {
        RationalExp(self.0 * rhs.0)
    }
}

impl fmt::Display for RationalExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den() == 1 {
            write!(f, "{}", self.num())
        } else {
            write!(f, "{}/{}", self.num(), self.den())
        }
    }
}

impl FromStr for RationalExp {
    type Err = Error;

    /// Accepts `p/q` or a bare integer `p`, with optional surrounding whitespace.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::validation(format!("invalid rational exponent {s:?}, expected \"p/q\""));
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: i64 = q.trim().parse().map_err(|_| bad())?;
                if q <= 0 {
                    return Err(bad());
                }
                RationalExp::new(p, q)
            }
            None => s.parse::<i64>().map(RationalExp::integer).map_err(|_| bad()),
        }
    }
}

/// One monomial `coeff·t^exp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub exp: RationalExp,
}

impl Term {
    pub fn new(coeff: f64, exp: RationalExp) -> Self {
        Term { coeff, exp }
    }
}

/// A finite sum of [`Term`]s, strictly increasing in exponent. The empty sum is zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FracSeries {
    terms: Vec<Term>,
}

impl FracSeries {
    pub fn zero() -> Self {
        FracSeries { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, RationalExp::ZERO)
    }

    pub fn monomial(c: f64, exp: RationalExp) -> Self {
        Self::normalize(vec![Term::new(c, exp)])
    }

    /// The identity series `t`.
    pub fn t() -> Self {
        Self::monomial(1.0, RationalExp::ONE)
    }

    /// Sorts by exponent, merges equal exponents and drops coefficients below
    /// [`DEFAULT_PRUNE_TOL`].
    pub fn normalize(terms: impl IntoIterator<Item = Term>) -> Self {
        Self::normalize_with(terms, DEFAULT_PRUNE_TOL)
    }

    pub fn normalize_with(terms: impl IntoIterator<Item = Term>, prune_tol: f64) -> Self {
        let mut terms: Vec<Term> = terms.into_iter().collect();
        terms.sort_by_key(|t| t.exp);
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for term in terms {
            match merged.last_mut() {
                Some(last) if last.exp == term.exp => last.coeff += term.coeff,
                _ => merged.push(term),
            }
        }
        merged.retain(|t| t.coeff.abs() >= prune_tol && t.coeff != 0.0);
        FracSeries { terms: merged }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `t^exp`, zero when absent.
    pub fn coeff(&self, exp: RationalExp) -> f64 {
        self.terms
            .binary_search_by(|t| t.exp.cmp(&exp))
            .map(|i| self.terms[i].coeff)
            .unwrap_or(0.0)
    }

    /// Value at `t = 0⁺` for a series without negative exponents: the constant term.
    pub fn constant_term(&self) -> f64 {
        self.coeff(RationalExp::ZERO)
    }

    pub fn min_exp(&self) -> Option<RationalExp> {
        self.terms.first().map(|t| t.exp)
    }

    pub fn max_exp(&self) -> Option<RationalExp> {
        self.terms.last().map(|t| t.exp)
    }

    pub fn add(&self, other: &FracSeries) -> FracSeries {
        Self::normalize(self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn sub(&self, other: &FracSeries) -> FracSeries {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> FracSeries {
        Self::normalize(self.terms.iter().map(|t| Term::new(t.coeff * c, t.exp)))
    }

    /// Full distributive product.
    pub fn mul(&self, other: &FracSeries) -> FracSeries {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push(Term::new(a.coeff * b.coeff, a.exp + b.exp));
            }
        }
        Self::normalize(out)
    }

    pub fn powi(&self, k: u32) -> FracSeries {
        let mut acc = FracSeries::constant(1.0);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Classical derivative. Rejects terms with `0 < β < 1`, whose derivative is singular at 0.
    pub fn derivative(&self) -> Result<FracSeries> {
        let mut out = Vec::with_capacity(self.len());
        for t in &self.terms {
            if t.exp.is_zero() {
                continue;
            }
            if t.exp < RationalExp::ONE {
                return Err(Error::domain(format!(
                    "derivative of t^({}) is singular at t = 0",
                    t.exp
                )));
            }
            out.push(Term::new(t.coeff * t.exp.to_f64(), t.exp - RationalExp::ONE));
        }
        Ok(Self::normalize(out))
    }

    /// `∫₀ᵗ a(s) ds`; requires every exponent `> -1`.
    pub fn antiderivative(&self) -> Result<FracSeries> {
        let mut out = Vec::with_capacity(self.len());
        for t in &self.terms {
            let e = t.exp + RationalExp::ONE;
            if !e.is_positive() {
                return Err(Error::domain(format!(
                    "∫₀ᵗ s^({}) ds diverges at 0",
                    t.exp
                )));
            }
            out.push(Term::new(t.coeff / e.to_f64(), e));
        }
        Ok(Self::normalize(out))
    }

    /// Pointwise value for `t ≥ 0`.
    ///
    /// Terms are summed from the highest exponent down, so on `[0, 1]` the
    /// smallest contributions are accumulated first.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::domain(format!("series evaluated at t = {t} < 0")));
        }
        let mut acc = 0.0;
        for term in self.terms.iter().rev() {
            acc += term.coeff * pow_rational(t, term.exp)?;
        }
        Ok(acc)
    }

    /// Drops every term whose exponent exceeds `cap`.
    pub fn truncate_above(&self, cap: RationalExp) -> FracSeries {
        FracSeries {
            terms: self.terms.iter().filter(|t| t.exp <= cap).copied().collect(),
        }
    }

    /// Re-prunes with a caller-chosen tolerance.
    pub fn prune(&self, tol: f64) -> FracSeries {
        Self::normalize_with(self.terms.iter().copied(), tol)
    }

    pub fn has_integer_exponents(&self) -> bool {
        self.terms.iter().all(|t| t.exp.is_integer())
    }

    /// Term-by-term comparison: same exponents, coefficients within `rel_tol` relative
    /// (absolute below magnitude 1).
    pub fn approx_eq(&self, other: &FracSeries, rel_tol: f64) -> bool {
        self.len() == other.len()
            && self.terms.iter().zip(&other.terms).all(|(a, b)| {
                a.exp == b.exp
                    && (a.coeff - b.coeff).abs() <= rel_tol * a.coeff.abs().max(b.coeff.abs()).max(1.0)
            })
    }
}

/// `t^β` with `t^0 = 1` (including at `t = 0`).
pub(crate) fn pow_rational(t: f64, exp: RationalExp) -> Result<f64> {
    if exp.is_zero() {
        return Ok(1.0);
    }
    if t == 0.0 {
        return if exp.is_positive() {
            Ok(0.0)
        } else {
            Err(Error::domain(format!("t^({exp}) is unbounded at t = 0")))
        };
    }
    if exp.is_integer() && exp.num().unsigned_abs() <= i32::MAX as u64 {
        Ok(t.powi(exp.num() as i32))
    } else {
        Ok(t.powf(exp.to_f64()))
    }
}

impl Add for &FracSeries {
    type Output = FracSeries;
    fn add(self, rhs: Self) -> FracSeries {
        FracSeries::add(self, rhs)
    }
}

impl Sub for &FracSeries {
    type Output = FracSeries;
    fn sub(self, rhs: Self) -> FracSeries {
        FracSeries::sub(self, rhs)
    }
}

impl Mul for &FracSeries {
    type Output = FracSeries;
    fn mul(self, rhs: Self) -> FracSeries {
        FracSeries::mul(self, rhs)
    }
}

impl Neg for &FracSeries {
    type Output = FracSeries;
    fn neg(self) -> FracSeries {
        self.scale(-1.0)
    }
}

impl fmt::Display for FracSeries {
    /// Renders as `c1*t^(p/q) + c2*t^2 - …`; unit coefficients and `t^1` are elided.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            let mag = term.coeff.abs();
            match (i, term.coeff < 0.0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let power = match (term.exp.num(), term.exp.den()) {
                (0, _) => None,
                (1, 1) => Some("t".to_string()),
                (n, 1) => Some(format!("t^{n}")),
                _ => Some(format!("t^({})", term.exp)),
            };
            match power {
                None => write!(f, "{mag}")?,
                Some(p) if mag == 1.0 => f.write_str(&p)?,
                Some(p) => write!(f, "{mag}*{p}")?,
            }
        }
        Ok(())
    }
}
