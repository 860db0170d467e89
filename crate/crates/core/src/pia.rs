//! Perturbation-iteration with one correction term and first-order Taylor
//! truncation, PIA(1,1).
//!
//! Each equation `D^α u = N(u) + f(t)` is embedded as
//!
//! ```text
//! F = ε·D^α u + u' - ε·u' - ε·N(u) - f(t)
//! ```
//!
//! where `f` collects the right-hand-side terms that do not involve any unknown
//! and `N` everything else. Then `F_u = 0`, `F_u' = 1`, and the correction
//! equation `u_c' + F_ε + F/ε = 0` (with `F` and `F_ε` taken at `ε = 0`) integrates
//! directly:
//!
//! ```text
//! u_c' = -D^α uₙ + N(uₙ) + f/ε + (1 - 1/ε)·uₙ'
//! u_c  = ∫₀ᵗ u_c' + C,   C chosen so that uₙ₊₁(0) = u(0)
//! uₙ₊₁ = uₙ + ε·u_c
//! ```
//!
//! At `ε = 1` this is `u_c = -∫₀ᵗ Rₙ` with the residual `Rₙ = D^α uₙ - rhs(uₙ)`.

use crate::error::{Error, Result};
use crate::fraccalc::caputo;
use crate::fracseries::{FracSeries, RationalExp, DEFAULT_PRUNE_TOL};
use crate::oracle::{residual_sup_norm, unit_grid, QuadSpec};
use crate::problem::{eval_expr, Expr, FideProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct PiaConfig {
    pub epsilon: f64,
    pub max_iter: usize,
    pub prune_tol: f64,
    /// Terms with a larger exponent are dropped after every step.
    pub max_exponent: Option<RationalExp>,
    /// Defaults to the constant series at the initial values.
    pub initial_guess: Option<Vec<FracSeries>>,
    /// Number of equally spaced points on `[0, 1]` used for the numeric residual
    /// recorded in the history; `0` disables it.
    pub residual_points: usize,
    pub quad: QuadSpec,
}

impl Default for PiaConfig {
    fn default() -> Self {
        PiaConfig {
            epsilon: 1.0,
            max_iter: 3,
            prune_tol: DEFAULT_PRUNE_TOL,
            max_exponent: None,
            initial_guess: None,
            residual_points: 21,
            quad: QuadSpec::default(),
        }
    }
}

impl PiaConfig {
    pub fn with_iterations(max_iter: usize) -> Self {
        PiaConfig {
            max_iter,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon == 0.0 || !self.epsilon.is_finite() {
            return Err(Error::validation("epsilon must be finite and nonzero"));
        }
        if self.max_iter == 0 {
            return Err(Error::validation("max_iter must be at least 1"));
        }
        if self.prune_tol.is_nan() || self.prune_tol < 0.0 {
            return Err(Error::validation("prune_tol must be non-negative"));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Index of the iterate this record describes (1 for `u₁`).
    pub n: usize,
    pub term_counts: Vec<usize>,
    /// Sup-norm over all unknowns of the quadrature residual on the configured grid.
    pub residual_sup_norm: Option<f64>,
    /// Integration constants `C` fixed by the initial conditions.
    pub correction_constants: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiaState {
    pub n: usize,
    pub iterates: Vec<FracSeries>,
    pub history: Vec<IterationRecord>,
}

impl PiaState {
    pub fn new(iterates: Vec<FracSeries>) -> Self {
        PiaState {
            n: 0,
            iterates,
            history: Vec::new(),
        }
    }

    /// Starting state from the configured guess, or constants at the initial values.
    pub fn initial(p: &FideProblem, cfg: &PiaConfig) -> Result<Self> {
        let iterates = match &cfg.initial_guess {
            Some(g) if g.len() != p.len() => {
                return Err(Error::validation(format!(
                    "initial guess has {} series for {} unknowns",
                    g.len(),
                    p.len()
                )))
            }
            Some(g) => g.clone(),
            None => p.initial.iter().map(|&c| FracSeries::constant(c)).collect(),
        };
        Ok(PiaState::new(iterates))
    }
}

/// Splits a right-hand side into (terms depending on unknowns, pure forcing).
fn split_rhs(e: &Expr) -> (Vec<&Expr>, Vec<&Expr>) {
    let items: Vec<&Expr> = match e {
        Expr::Sum(items) => items.iter().collect(),
        other => vec![other],
    };
    items.into_iter().partition(|x| x.depends_on_unknowns())
}

fn eval_sum(items: &[&Expr], state: &[FracSeries]) -> Result<FracSeries> {
    items
        .iter()
        .try_fold(FracSeries::zero(), |acc, e| Ok(acc.add(&eval_expr(e, state)?)))
}

/// `Rⱼ = D^αⱼ uⱼ - rhsⱼ(u)` for every unknown, exactly.
pub fn residual(p: &FideProblem, state: &PiaState) -> Result<Vec<FracSeries>> {
    residual_of(p, &state.iterates)
}

pub fn residual_of(p: &FideProblem, iterates: &[FracSeries]) -> Result<Vec<FracSeries>> {
    (0..p.len())
        .map(|j| {
            let d = caputo(&iterates[j], p.orders[j])?;
            Ok(d.sub(&eval_expr(&p.rhs[j], iterates)?))
        })
        .collect()
}

/// Correction terms `u_c` (one per unknown) together with their integration constants.
pub fn correction_with_constants(
    p: &FideProblem,
    state: &PiaState,
    cfg: &PiaConfig,
) -> Result<Vec<(FracSeries, f64)>> {
    cfg.validate()?;
    let eps = cfg.epsilon;
    (0..p.len())
        .map(|j| {
            correction_one(p, &state.iterates, j, eps).map_err(|e| Error::Iteration {
                n: state.n,
                unknown: j,
                source: Box::new(e),
            })
        })
        .collect()
}

fn correction_one(p: &FideProblem, iterates: &[FracSeries], j: usize, eps: f64) -> Result<(FracSeries, f64)> {
    let u = &iterates[j];
    let (dependent, forcing) = split_rhs(&p.rhs[j]);
    let mut slope = caputo(u, p.orders[j])?.scale(-1.0);
    slope = slope.add(&eval_sum(&dependent, iterates)?);
    let f = eval_sum(&forcing, iterates)?;
    if eps == 1.0 {
        slope = slope.add(&f);
    } else {
        slope = slope.add(&f.scale(1.0 / eps));
        slope = slope.add(&u.derivative()?.scale(1.0 - 1.0 / eps));
    }
    let integrated = slope.antiderivative()?;
    let c = (p.initial[j] - u.constant_term()) / eps;
    Ok((integrated.add(&FracSeries::constant(c)), c))
}

/// Correction terms `u_c` for the current state.
pub fn correction(p: &FideProblem, state: &PiaState, cfg: &PiaConfig) -> Result<Vec<FracSeries>> {
    Ok(correction_with_constants(p, state, cfg)?
        .into_iter()
        .map(|(s, _)| s)
        .collect())
}

/// One step `uₙ₊₁ = uₙ + ε·u_c`.
pub fn iterate(p: &FideProblem, state: &PiaState, cfg: &PiaConfig) -> Result<PiaState> {
    let corrections = correction_with_constants(p, state, cfg)?;
    let mut next = Vec::with_capacity(p.len());
    let mut constants = Vec::with_capacity(p.len());
    for (u, (uc, c)) in state.iterates.iter().zip(corrections) {
        let mut v = u.add(&uc.scale(cfg.epsilon)).prune(cfg.prune_tol);
        if let Some(cap) = cfg.max_exponent {
            v = v.truncate_above(cap);
        }
        next.push(v);
        constants.push(c);
    }
    let residual_sup_norm = if cfg.residual_points > 0 {
        residual_sup_norm(p, &next, &unit_grid(cfg.residual_points), cfg.quad).ok()
    } else {
        None
    };
    let mut history = state.history.clone();
    history.push(IterationRecord {
        n: state.n + 1,
        term_counts: next.iter().map(FracSeries::len).collect(),
        residual_sup_norm,
        correction_constants: constants,
    });
    Ok(PiaState {
        n: state.n + 1,
        iterates: next,
        history,
    })
}

/// Runs `cfg.max_iter` iterations from the initial guess. No convergence test is applied.
pub fn solve(p: &FideProblem, cfg: &PiaConfig) -> Result<PiaState> {
    Ok(trajectory(p, cfg)?.pop().expect("trajectory includes the initial state"))
}

/// Every state `u₀, u₁, …, u_max_iter`.
pub fn trajectory(p: &FideProblem, cfg: &PiaConfig) -> Result<Vec<PiaState>> {
    cfg.validate()?;
    let mut states = vec![PiaState::initial(p, cfg)?];
    for _ in 0..cfg.max_iter {
        let next = iterate(p, states.last().unwrap(), cfg)?;
        states.push(next);
    }
    Ok(states)
}
