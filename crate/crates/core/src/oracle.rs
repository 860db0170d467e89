//! Brute-force numeric counterparts of the symbolic operators.
//!
//! Everything here works pointwise: series are only ever *evaluated* (plus the
//! classical derivative where a Caputo integrand needs `u'`), and every integral
//! is computed by adaptive Gauss–Kronrod quadrature. Weakly singular kernels
//! `(t-s)^g`, `-1 < g < 0`, are removed by the substitution `w = (t-s)^(g+1)`,
//! which turns `∫₀ᵗ (t-s)^g h(s) ds` into `1/(g+1) ∫₀^(t^(g+1)) h(t - w^(1/(g+1))) dw`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::fraccalc::{gamma, FracOrder};
use crate::fracseries::FracSeries;
use crate::pia::PiaState;
use crate::problem::{Expr, FideProblem, KernelMonomial};

/// Tolerance and depth limit for [`quad`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-10,
            max_depth: 50,
        }
    }
}

impl QuadSpec {
    pub fn new(abs_tol: f64, max_depth: u32) -> Result<Self> {
        if abs_tol.is_nan() || abs_tol <= 0.0 {
            return Err(Error::validation("quadrature tolerance must be positive"));
        }
        Ok(QuadSpec { abs_tol, max_depth })
    }
}

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Total number of subintervals allowed before giving up, independent of depth.
const MAX_INTERVALS: usize = 200_000;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gauss_kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        return Err(Error::domain(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok((value, err))
}

/// Adaptive quadrature of a fallible integrand. Intervals are bisected largest
/// error first until the summed error estimate falls below `spec.abs_tol`.
pub fn quad_try<F>(mut f: F, a: f64, b: f64, spec: QuadSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return quad_try(f, b, a, spec).map(|v| -v);
    }
    let (value, err) = gauss_kronrod(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value,
        err,
        depth: 0,
    });
    let min_width = (b - a) * 1e-15;
    let mut open_err = err;
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    let mut count = 1usize;
    while let Some(seg) = heap.pop() {
        if open_err + frozen_err <= spec.abs_tol {
            heap.push(seg);
            break;
        }
        open_err -= seg.err;
        let width = seg.b - seg.a;
        // below roundoff there is nothing left to refine
        let resolved = seg.err <= 50.0 * f64::EPSILON * seg.value.abs();
        if resolved || seg.depth >= spec.max_depth || count >= MAX_INTERVALS || width <= min_width {
            frozen_value += seg.value;
            frozen_err += seg.err;
            continue;
        }
        let mid = 0.5 * (seg.a + seg.b);
        let (lv, le) = gauss_kronrod(&mut f, seg.a, mid)?;
        let (rv, re) = gauss_kronrod(&mut f, mid, seg.b)?;
        count += 1;
        open_err += le + re;
        for (lo, hi, value, err) in [(seg.a, mid, lv, le), (mid, seg.b, rv, re)] {
            heap.push(Segment {
                a: lo,
                b: hi,
                value,
                err,
                depth: seg.depth + 1,
            });
        }
    }
    let open_err: f64 = heap.iter().map(|s| s.err).sum();
    if open_err + frozen_err > spec.abs_tol {
        return Err(Error::NoConvergence {
            a,
            b,
            estimate: open_err + frozen_err,
            tolerance: spec.abs_tol,
        });
    }
    Ok(frozen_value + heap.iter().map(|s| s.value).sum::<f64>())
}

/// Adaptive quadrature of `f` over `[a, b]`.
pub fn quad<F>(f: F, a: f64, b: f64, spec: QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    quad_try(|x| Ok(f(x)), a, b, spec)
}

/// `∫₀ᵗ (t-s)^g h(s) ds` for `g > -1`.
pub fn convolution_numeric<F>(h: F, g: f64, t: f64, spec: QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if g.is_nan() || g <= -1.0 {
        return Err(Error::domain(format!("kernel (t-s)^{g} is not integrable")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if g >= 0.0 {
        return quad_try(|s| Ok((t - s).powf(g) * h(s)?), 0.0, t, spec);
    }
    let p = g + 1.0;
    let upper = t.powf(p);
    let inv = 1.0 / p;
    let v = quad_try(|w| h((t - w.powf(inv)).max(0.0)), 0.0, upper, spec)?;
    Ok(v / p)
}

/// Numeric Caputo derivative `1/Γ(1-α) ∫₀ᵗ (t-s)^(-α) u'(s) ds`; `u'(t)` at `α = 1`.
///
/// At `t = 0` the value is taken as the limit `0` for `α < 1` (bounded `u'`).
pub fn caputo_numeric(u: &FracSeries, order: FracOrder, t: f64, spec: QuadSpec) -> Result<f64> {
    let du = u.derivative()?;
    caputo_numeric_with_derivative(&du, order, t, spec)
}

fn caputo_numeric_with_derivative(du: &FracSeries, order: FracOrder, t: f64, spec: QuadSpec) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::domain(format!("Caputo derivative at t = {t} < 0")));
    }
    if order.is_integer() {
        return du.eval(t);
    }
    let alpha = order.to_f64();
    let conv = convolution_numeric(|s| du.eval(s), -alpha, t, spec)?;
    Ok(conv / gamma(1.0 - alpha)?)
}

/// Numeric Riemann–Liouville integral `1/Γ(α) ∫₀ᵗ (t-s)^(α-1) u(s) ds`.
pub fn rl_integral_numeric(u: &FracSeries, order: FracOrder, t: f64, spec: QuadSpec) -> Result<f64> {
    let alpha = order.to_f64();
    let conv = convolution_numeric(|s| u.eval(s), alpha - 1.0, t, spec)?;
    Ok(conv / gamma(alpha)?)
}

/// Numeric Riemann–Liouville derivative via `D_RL^α u = D_C^α u + u(0)·t^(-α)/Γ(1-α)`.
pub fn rl_derivative_numeric(u: &FracSeries, order: FracOrder, t: f64, spec: QuadSpec) -> Result<f64> {
    let caputo = caputo_numeric(u, order, t, spec)?;
    if order.is_integer() {
        return Ok(caputo);
    }
    if t <= 0.0 {
        return Err(Error::domain("RL derivative of a nonzero constant is unbounded at t = 0"));
    }
    let alpha = order.to_f64();
    Ok(caputo + u.eval(0.0)? * t.powf(-alpha) / gamma(1.0 - alpha)?)
}

/// Series values and classical derivatives, prepared once for pointwise evaluation.
pub struct NumericState {
    series: Vec<FracSeries>,
    derivs: Vec<Option<FracSeries>>,
}

impl NumericState {
    pub fn new(series: &[FracSeries]) -> Self {
        NumericState {
            series: series.to_vec(),
            derivs: series.iter().map(|s| s.derivative().ok()).collect(),
        }
    }

    fn value(&self, i: usize, t: f64) -> Result<f64> {
        self.series
            .get(i)
            .ok_or_else(|| Error::validation(format!("no state for unknown index {i}")))?
            .eval(t)
    }

    fn deriv(&self, i: usize, t: f64) -> Result<f64> {
        match self.derivs.get(i) {
            Some(Some(d)) => d.eval(t),
            Some(None) => Err(Error::domain(format!("unknown #{i} has no classical derivative"))),
            None => Err(Error::validation(format!("no state for unknown index {i}"))),
        }
    }
}

/// Pointwise value of an expression; integral nodes by quadrature.
pub fn eval_expr_numeric(e: &Expr, state: &NumericState, t: f64, spec: QuadSpec) -> Result<f64> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::TPow(p) => {
            if p.is_zero() {
                Ok(1.0)
            } else {
                Ok(t.powf(p.to_f64()))
            }
        }
        Expr::Unknown(i) => state.value(*i, t),
        Expr::UnknownDeriv(i) => state.deriv(*i, t),
        Expr::Sum(items) => items
            .iter()
            .try_fold(0.0, |acc, x| Ok(acc + eval_expr_numeric(x, state, t, spec)?)),
        Expr::Product(items) => items
            .iter()
            .try_fold(1.0, |acc, x| Ok(acc * eval_expr_numeric(x, state, t, spec)?)),
        Expr::IntPow(base, k) => Ok(eval_expr_numeric(base, state, t, spec)?.powi(*k as i32)),
        Expr::Volterra { kernel, integrand } => kernel.iter().try_fold(0.0, |acc, k| {
            Ok(acc + volterra_monomial(k, integrand, state, t, spec)?)
        }),
        Expr::Fredholm { kernel, integrand } => kernel.iter().try_fold(0.0, |acc, k| {
            let b = k.s_pow.to_f64();
            let moment = quad_try(
                |s| Ok(s.powf(b) * eval_expr_numeric(integrand, state, s, spec)?),
                0.0,
                1.0,
                spec,
            )?;
            Ok(acc + k.coeff * t.powf(k.t_pow.to_f64()) * moment)
        }),
    }
}

fn volterra_monomial(
    k: &KernelMonomial,
    integrand: &Expr,
    state: &NumericState,
    t: f64,
    spec: QuadSpec,
) -> Result<f64> {
    let b = k.s_pow.to_f64();
    let conv = convolution_numeric(
        |s| Ok(s.powf(b) * eval_expr_numeric(integrand, state, s, spec)?),
        k.tms_pow.to_f64(),
        t,
        spec,
    )?;
    Ok(k.coeff * t.powf(k.t_pow.to_f64()) * conv)
}

/// `D^αⱼ uⱼ(t) - rhsⱼ(t)` at each point, per unknown, using quadrature only.
///
/// Points must lie in `[0, 1]`; at `t = 0` the Caputo term uses its limit value.
pub fn residual_numeric(
    p: &FideProblem,
    state: &PiaState,
    ts: &[f64],
    spec: QuadSpec,
) -> Result<Vec<Vec<f64>>> {
    residual_numeric_series(p, &state.iterates, ts, spec)
}

pub fn residual_numeric_series(
    p: &FideProblem,
    iterates: &[FracSeries],
    ts: &[f64],
    spec: QuadSpec,
) -> Result<Vec<Vec<f64>>> {
    if let Some(t) = ts.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::domain(format!("residual point {t} outside [0, 1]")));
    }
    let ns = NumericState::new(iterates);
    (0..p.len())
        .map(|j| {
            let du = ns.derivs[j]
                .clone()
                .ok_or_else(|| Error::domain(format!("unknown #{j} has no classical derivative")))?;
            ts.iter()
                .map(|&t| {
                    let lhs = caputo_numeric_with_derivative(&du, p.orders[j], t, spec)?;
                    let rhs = eval_expr_numeric(&p.rhs[j], &ns, t, spec)?;
                    Ok(lhs - rhs)
                })
                .collect()
        })
        .collect()
}

/// Largest absolute residual over all unknowns and points.
pub fn residual_sup_norm(
    p: &FideProblem,
    iterates: &[FracSeries],
    ts: &[f64],
    spec: QuadSpec,
) -> Result<f64> {
    let r = residual_numeric_series(p, iterates, ts, spec)?;
    Ok(r.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// `n` equally spaced points covering `[0, 1]`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}
