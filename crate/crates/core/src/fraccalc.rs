//! Gamma/Beta functions and the fractional operators acting on [`FracSeries`].
//!
//! All operators here are termwise power rules, exact in the exponents:
//!
//! * Riemann–Liouville integral `J^α t^β = Γ(β+1)/Γ(β+1+α) · t^(β+α)`
//! * Caputo derivative `D^α t^β = Γ(β+1)/Γ(β+1-α) · t^(β-α)` for `β > 0`, zero on constants
//! * Riemann–Liouville derivative, which differs from Caputo only on constants
//! * the power-kernel convolution `∫₀ᵗ (t-s)^g a(s) ds`, through which every
//!   Volterra integral and the convolution form of the Caputo derivative reduce
//!   to Beta-function values.
//!
//! Orders are restricted to `0 < α ≤ 1`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fracseries::{FracSeries, RationalExp, Term};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest `n` with `(n-1)!` finite in `f64`.
const MAX_FACTORIAL_ARG: f64 = 171.0;

fn lanczos_sum(x: f64) -> f64 {
    // x has already been shifted by one
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Euler Gamma function.
///
/// Positive integers up to 171 are returned as exact factorials (the products are
/// exact in `f64` as long as they fit). Everything else goes through the `g = 7`
/// Lanczos approximation, with the reflection formula below `1/2`.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("gamma(NaN)"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x == x.floor() && x <= MAX_FACTORIAL_ARG {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return Ok(acc);
    }
    if x < 0.5 {
        return Ok(PI / ((PI * x).sin() * gamma(1.0 - x)?));
    }
    let z = x - 1.0;
    let w = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * w.powf(z + 0.5) * (-w).exp() * lanczos_sum(z))
}

/// `ln |Γ(x)|`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("ln_gamma(NaN)"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x < 0.5 {
        // |Γ(x)| = π / |sin(πx) Γ(1-x)|
        return Ok(PI.ln() - (PI * x).sin().abs().ln() - ln_gamma(1.0 - x)?);
    }
    if x < 20.0 {
        return Ok(gamma(x)?.abs().ln());
    }
    let z = x - 1.0;
    let w = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * w.ln() - w + lanczos_sum(z).ln())
}

/// `Γ(a)/Γ(b)` without intermediate overflow.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if is_nonpositive_integer(b) {
        return Ok(0.0);
    }
    if a.abs() < MAX_FACTORIAL_ARG && b.abs() < MAX_FACTORIAL_ARG {
        return Ok(gamma(a)? / gamma(b)?);
    }
    let sign = gamma_sign(a) * gamma_sign(b);
    Ok(sign * (ln_gamma(a)? - ln_gamma(b)?).exp())
}

fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 || (x.floor() as i64).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` for `a, b > 0`.
///
/// When either argument is a small positive integer `n` the finite product
/// `(n-1)! / (x (x+1) … (x+n-1))` is used; otherwise the value is assembled in
/// log space.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!("beta({a}, {b}) needs positive arguments")));
    }
    let small_int = |v: f64| v == v.floor() && v <= 64.0;
    let (n, x) = if small_int(a) {
        (a, b)
    } else if small_int(b) {
        (b, a)
    } else {
        return Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp());
    };
    let mut acc = 1.0 / x;
    let mut k = 1.0;
    while k < n {
        acc *= k / (x + k);
        k += 1.0;
    }
    Ok(acc)
}

/// A fractional order `α` with `0 < α ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FracOrder(RationalExp);

impl FracOrder {
    pub fn new(alpha: RationalExp) -> Result<Self> {
        if alpha.is_positive() && alpha <= RationalExp::ONE {
            Ok(FracOrder(alpha))
        } else {
            Err(Error::validation(format!(
                "fractional order {alpha} outside 0 < alpha <= 1"
            )))
        }
    }

    pub fn one() -> Self {
        FracOrder(RationalExp::ONE)
    }

    pub fn alpha(&self) -> RationalExp {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_integer(&self) -> bool {
        self.0 == RationalExp::ONE
    }
}

impl FromStr for FracOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FracOrder::new(s.parse()?)
    }
}

impl fmt::Display for FracOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `∫₀ᵗ (t-s)^g a(s) ds = Σ c·B(g+1, β+1)·t^(g+β+1)`.
pub fn power_kernel_convolve(a: &FracSeries, g: RationalExp) -> Result<FracSeries> {
    let minus_one = RationalExp::integer(-1);
    if g <= minus_one {
        return Err(Error::domain(format!("kernel (t-s)^({g}) is not integrable")));
    }
    let mut out = Vec::with_capacity(a.len());
    for term in a.terms() {
        if term.exp <= minus_one {
            return Err(Error::domain(format!(
                "integrand term s^({}) is not integrable at 0",
                term.exp
            )));
        }
        let b = beta(g.to_f64() + 1.0, term.exp.to_f64() + 1.0)?;
        out.push(Term::new(term.coeff * b, g + term.exp + RationalExp::ONE));
    }
    Ok(FracSeries::normalize(out))
}

/// Caputo derivative by the termwise power rule. At `α = 1` this is the classical
/// derivative.
pub fn caputo(a: &FracSeries, order: FracOrder) -> Result<FracSeries> {
    if order.is_integer() {
        return a.derivative();
    }
    let alpha = order.alpha();
    let mut out = Vec::with_capacity(a.len());
    for term in a.terms() {
        if term.exp.is_zero() {
            continue;
        }
        if term.exp.is_negative() {
            return Err(Error::domain(format!(
                "Caputo derivative of t^({}) is undefined",
                term.exp
            )));
        }
        let beta1 = term.exp.to_f64() + 1.0;
        let denom_arg = beta1 - alpha.to_f64();
        debug_assert!(denom_arg > 0.0);
        let c = gamma_ratio(beta1, denom_arg)?;
        out.push(Term::new(term.coeff * c, term.exp - alpha));
    }
    Ok(FracSeries::normalize(out))
}

/// Caputo derivative through its convolution form
/// `1/Γ(1-α) ∫₀ᵗ (t-s)^(-α) a'(s) ds`. Needs `a'` to exist in the series class.
pub fn caputo_via_convolution(a: &FracSeries, order: FracOrder) -> Result<FracSeries> {
    let da = a.derivative()?;
    if order.is_integer() {
        return Ok(da);
    }
    let alpha = order.alpha();
    let conv = power_kernel_convolve(&da, -alpha)?;
    Ok(conv.scale(1.0 / gamma(1.0 - alpha.to_f64())?))
}

/// Riemann–Liouville fractional integral of order `α`.
pub fn rl_integral(a: &FracSeries, order: FracOrder) -> Result<FracSeries> {
    let alpha = order.alpha();
    let mut out = Vec::with_capacity(a.len());
    for term in a.terms() {
        if term.exp <= RationalExp::integer(-1) {
            return Err(Error::domain(format!(
                "J^α of t^({}) diverges at 0",
                term.exp
            )));
        }
        let beta1 = term.exp.to_f64() + 1.0;
        let c = gamma_ratio(beta1, beta1 + alpha.to_f64())?;
        out.push(Term::new(term.coeff * c, term.exp + alpha));
    }
    Ok(FracSeries::normalize(out))
}

/// Riemann–Liouville fractional derivative `d/dt J^(1-α)`. Unlike Caputo it maps a
/// constant `c` to `c·t^(-α)/Γ(1-α)` when `α < 1`.
pub fn rl_derivative(a: &FracSeries, order: FracOrder) -> Result<FracSeries> {
    let alpha = order.alpha();
    let mut out = Vec::with_capacity(a.len());
    for term in a.terms() {
        if term.exp.is_negative() {
            return Err(Error::domain(format!(
                "RL derivative of t^({}) is outside the supported class",
                term.exp
            )));
        }
        let beta1 = term.exp.to_f64() + 1.0;
        // 1/Γ(0) = 0 kills the constant at α = 1
        let c = gamma_ratio(beta1, beta1 - alpha.to_f64())?;
        out.push(Term::new(term.coeff * c, term.exp - alpha));
    }
    Ok(FracSeries::normalize(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn r(n: i64, d: i64) -> RationalExp {
        RationalExp::new(n, d).unwrap()
    }

    fn ord(n: i64, d: i64) -> FracOrder {
        FracOrder::new(r(n, d)).unwrap()
    }

    fn series(terms: &[(f64, i64, i64)]) -> FracSeries {
        FracSeries::normalize(terms.iter().map(|&(c, n, d)| Term::new(c, r(n, d))))
    }

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_relative_eq!(gamma(0.5).unwrap(), SQRT_PI, max_relative = 1e-14);
        assert_relative_eq!(gamma(2.5).unwrap(), 0.75 * SQRT_PI, max_relative = 1e-14);
        assert_relative_eq!(gamma(-0.5).unwrap(), -2.0 * SQRT_PI, max_relative = 1e-14);
        assert!(matches!(gamma(0.0), Err(Error::Pole(_))));
        assert!(matches!(gamma(-3.0), Err(Error::Pole(_))));
    }

    #[test]
    fn gamma_recurrence_on_grid() {
        // Γ(x+1) = xΓ(x) tested off the integers, where the Lanczos branch is used
        let mut x = 0.05;
        while x < 29.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            x += 0.37;
        }
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.3, 1.7, 4.5, 19.9, 20.1, 25.25, 29.5] {
            assert_relative_eq!(ln_gamma(x).unwrap(), gamma(x).unwrap().ln(), max_relative = 1e-12);
        }
        assert_relative_eq!(ln_gamma(200.0).unwrap(), 857.933_669_825_857_2, max_relative = 1e-13);
    }

    #[test]
    fn beta_values() {
        assert_relative_eq!(beta(2.0, 2.0).unwrap(), 1.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(beta(1.0, 3.5).unwrap(), 1.0 / 3.5, max_relative = 1e-15);
        assert_relative_eq!(beta(0.5, 1.5).unwrap(), PI / 2.0, max_relative = 1e-13);
        assert_relative_eq!(beta(2.5, 3.25).unwrap(), beta(3.25, 2.5).unwrap(), max_relative = 1e-14);
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -2.0).is_err());
        // large arguments stay finite
        assert!(beta(150.5, 160.5).unwrap() > 0.0);
    }

    #[test]
    fn order_range() {
        assert!(FracOrder::new(r(3, 2)).is_err());
        assert!(FracOrder::new(RationalExp::ZERO).is_err());
        assert!("1/1".parse::<FracOrder>().unwrap().is_integer());
    }

    #[test]
    fn convolution_examples() {
        let t = FracSeries::t();
        assert!(power_kernel_convolve(&t, r(1, 1))
            .unwrap()
            .approx_eq(&series(&[(1.0 / 6.0, 3, 1)]), 1e-15));
        assert!(power_kernel_convolve(&FracSeries::constant(1.0), r(-1, 2))
            .unwrap()
            .approx_eq(&series(&[(2.0, 1, 2)]), 1e-14));
        assert!(power_kernel_convolve(&t, r(-1, 2))
            .unwrap()
            .approx_eq(&series(&[(4.0 / 3.0, 3, 2)]), 1e-14));
        assert!(power_kernel_convolve(&t, r(-1, 1)).is_err());
        assert!(power_kernel_convolve(&series(&[(1.0, -3, 2)]), r(0, 1)).is_err());
    }

    #[test]
    fn caputo_examples() {
        for alpha in [ord(1, 4), ord(1, 2), ord(1, 1)] {
            assert!(caputo(&FracSeries::constant(3.0), alpha).unwrap().is_zero());
        }
        let a = ord(1, 2);
        let d = caputo(&series(&[(1.0, 2, 1)]), a).unwrap();
        assert_eq!(d.terms()[0].exp, r(3, 2));
        assert_relative_eq!(d.terms()[0].coeff, 8.0 / (3.0 * SQRT_PI), max_relative = 1e-13);
        assert_relative_eq!(d.terms()[0].coeff, 1.504_505_556_127_350_4, max_relative = 1e-12);

        let u1 = series(&[(1.0, 1, 1), (1.0 / 6.0, 3, 1)]);
        let alpha = 0.5;
        let d = caputo(&u1, a).unwrap();
        let expect = series(&[
            (1.0 / gamma(2.0 - alpha).unwrap(), 1, 2),
            (1.0 / gamma(4.0 - alpha).unwrap(), 5, 2),
        ]);
        assert!(d.approx_eq(&expect, 1e-14));
    }

    #[test]
    fn caputo_routes_agree() {
        let u = series(&[(2.0, 0, 1), (1.0, 1, 1), (-0.3, 3, 2), (0.25, 7, 3)]);
        for alpha in [ord(1, 4), ord(1, 2), ord(3, 4), ord(1, 1)] {
            let direct = caputo(&u, alpha).unwrap();
            let conv = caputo_via_convolution(&u, alpha).unwrap();
            assert!(direct.approx_eq(&conv, 1e-12), "alpha = {alpha}");
        }
    }

    #[test]
    fn caputo_at_one_is_derivative() {
        let u = series(&[(1.0, 0, 1), (3.0, 1, 1), (-2.0, 5, 2)]);
        assert_eq!(caputo(&u, FracOrder::one()).unwrap(), u.derivative().unwrap());
    }

    #[test]
    fn rl_integral_examples() {
        assert!(rl_integral(&FracSeries::zero(), ord(1, 2)).unwrap().is_zero());
        let half = rl_integral(&FracSeries::constant(1.0), ord(1, 2)).unwrap();
        assert_eq!(half.terms()[0].exp, r(1, 2));
        assert_relative_eq!(half.terms()[0].coeff, 2.0 / SQRT_PI, max_relative = 1e-14);
        assert_eq!(
            rl_integral(&FracSeries::t(), FracOrder::one()).unwrap(),
            series(&[(0.5, 2, 1)])
        );
    }

    #[test]
    fn rl_derivative_examples() {
        let d = rl_derivative(&FracSeries::constant(1.0), ord(1, 2)).unwrap();
        assert_eq!(d.terms()[0].exp, r(-1, 2));
        assert_relative_eq!(d.terms()[0].coeff, 1.0 / SQRT_PI, max_relative = 1e-14);
        let u = series(&[(1.0, 1, 1), (0.5, 5, 2)]);
        assert!(rl_derivative(&u, ord(1, 3))
            .unwrap()
            .approx_eq(&caputo(&u, ord(1, 3)).unwrap(), 1e-15));
        assert_eq!(
            rl_derivative(&series(&[(1.0, 2, 1)]), FracOrder::one()).unwrap(),
            series(&[(2.0, 1, 1)])
        );
        assert!(rl_derivative(&FracSeries::constant(4.0), FracOrder::one())
            .unwrap()
            .is_zero());
    }
}
