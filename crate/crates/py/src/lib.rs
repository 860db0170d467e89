//! Python bindings: series arithmetic, fractional operators, problems and the solver.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pia_core::fraccalc;
use pia_core::oracle::{residual_sup_norm, QuadSpec};
use pia_core::report;
use pia_core::{Error, FideProblem, FracOrder, FracSeries, PiaConfig, RationalExp, Term};

fn to_py(e: Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn order(alpha: &str) -> PyResult<FracOrder> {
    alpha.parse().map_err(to_py)
}

/// Finite sum of `coeff * t**exp` terms with exact rational exponents.
#[pyclass(name = "FracSeries", module = "fide_pia")]
pub struct PySeries {
    inner: FracSeries,
}

impl From<FracSeries> for PySeries {
    fn from(inner: FracSeries) -> Self {
        PySeries { inner }
    }
}

#[pymethods]
impl PySeries {
    /// `terms` is a list of `(coeff, exponent)` pairs; exponents are ints or `"p/q"` strings.
    #[new]
    #[pyo3(signature = (terms = Vec::new()))]
    fn new(terms: Vec<(f64, Bound<'_, PyAny>)>) -> PyResult<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (c, e) in terms {
            let exp = if let Ok(i) = e.extract::<i64>() {
                RationalExp::integer(i)
            } else {
                e.extract::<String>()?.parse::<RationalExp>().map_err(to_py)?
            };
            out.push(Term::new(c, exp));
        }
        Ok(FracSeries::normalize(out).into())
    }

    /// `(coeff, "p/q")` pairs in increasing exponent order.
    fn terms(&self) -> Vec<(f64, String)> {
        self.inner.terms().iter().map(|t| (t.coeff, t.exp.to_string())).collect()
    }

    fn coeff(&self, exp: &str) -> PyResult<f64> {
        Ok(self.inner.coeff(exp.parse().map_err(to_py)?))
    }

    fn eval(&self, t: f64) -> PyResult<f64> {
        self.inner.eval(t).map_err(to_py)
    }

    fn __call__(&self, t: f64) -> PyResult<f64> {
        self.eval(t)
    }

    fn derivative(&self) -> PyResult<PySeries> {
        Ok(self.inner.derivative().map_err(to_py)?.into())
    }

    fn antiderivative(&self) -> PyResult<PySeries> {
        Ok(self.inner.antiderivative().map_err(to_py)?.into())
    }

    fn caputo(&self, alpha: &str) -> PyResult<PySeries> {
        Ok(fraccalc::caputo(&self.inner, order(alpha)?).map_err(to_py)?.into())
    }

    fn rl_integral(&self, alpha: &str) -> PyResult<PySeries> {
        Ok(fraccalc::rl_integral(&self.inner, order(alpha)?).map_err(to_py)?.into())
    }

    fn rl_derivative(&self, alpha: &str) -> PyResult<PySeries> {
        Ok(fraccalc::rl_derivative(&self.inner, order(alpha)?).map_err(to_py)?.into())
    }

    fn __add__(&self, other: PyRef<'_, PySeries>) -> PySeries {
        self.inner.add(&other.inner).into()
    }

    fn __sub__(&self, other: PyRef<'_, PySeries>) -> PySeries {
        self.inner.sub(&other.inner).into()
    }

    fn __mul__(&self, other: &Bound<'_, PyAny>) -> PyResult<PySeries> {
        if let Ok(s) = other.cast::<PySeries>() {
            return Ok(self.inner.mul(&s.borrow().inner).into());
        }
        let c: f64 = other.extract()?;
        Ok(self.inner.scale(c).into())
    }

    fn __rmul__(&self, c: f64) -> PySeries {
        self.inner.scale(c).into()
    }

    fn __neg__(&self) -> PySeries {
        self.inner.scale(-1.0).into()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: PyRef<'_, PySeries>) -> bool {
        self.inner == other.inner
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("FracSeries({})", self.inner)
    }
}

/// A system `D^a_j u_j = rhs_j`, loaded from JSON or taken from the built-ins.
#[pyclass(name = "Problem", module = "fide_pia")]
pub struct PyProblem {
    inner: FideProblem,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(PyProblem {
            inner: pia_core::builtin(name).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(document: &str) -> PyResult<Self> {
        Ok(PyProblem {
            inner: pia_core::load_problem(document).map_err(to_py)?,
        })
    }

    /// Copy with new orders: one `"p/q"` for all unknowns or one per unknown.
    fn with_orders(&self, orders: Vec<String>) -> PyResult<Self> {
        let orders = orders.iter().map(|s| order(s)).collect::<PyResult<Vec<_>>>()?;
        Ok(PyProblem {
            inner: self.inner.clone().with_orders(&orders).map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn unknowns(&self) -> Vec<String> {
        self.inner.unknowns.clone()
    }

    #[getter]
    fn orders(&self) -> Vec<String> {
        self.inner.orders.iter().map(|o| o.to_string()).collect()
    }

    #[getter]
    fn initial(&self) -> Vec<f64> {
        self.inner.initial.clone()
    }

    /// Reference solution values at `t`, or `None` without a reference.
    fn reference(&self, t: f64) -> Option<Vec<f64>> {
        self.inner
            .reference
            .as_ref()
            .map(|r| r.iter().map(|e| e.eval(t)).collect())
    }

    fn __repr__(&self) -> String {
        format!("Problem({:?}, unknowns={:?})", self.inner.name, self.inner.unknowns)
    }
}

fn config(iters: usize, epsilon: f64, prune_tol: Option<f64>) -> PiaConfig {
    let mut cfg = PiaConfig {
        epsilon,
        max_iter: iters,
        residual_points: 0,
        ..Default::default()
    };
    if let Some(tol) = prune_tol {
        cfg.prune_tol = tol;
    }
    cfg
}

/// Runs `iters` steps and returns the final iterate of every unknown.
#[pyfunction]
#[pyo3(signature = (problem, iters = 3, epsilon = 1.0, prune_tol = None))]
fn solve(problem: PyRef<'_, PyProblem>, iters: usize, epsilon: f64, prune_tol: Option<f64>) -> PyResult<Vec<PySeries>> {
    let state = pia_core::solve(&problem.inner, &config(iters, epsilon, prune_tol)).map_err(to_py)?;
    Ok(state.iterates.into_iter().map(PySeries::from).collect())
}

/// Every state `u_0 .. u_iters`, each a list with one series per unknown.
#[pyfunction]
#[pyo3(signature = (problem, iters = 3, epsilon = 1.0, prune_tol = None))]
fn trajectory(
    problem: PyRef<'_, PyProblem>,
    iters: usize,
    epsilon: f64,
    prune_tol: Option<f64>,
) -> PyResult<Vec<Vec<PySeries>>> {
    let states = pia_core::trajectory(&problem.inner, &config(iters, epsilon, prune_tol)).map_err(to_py)?;
    Ok(states
        .into_iter()
        .map(|s| s.iterates.into_iter().map(PySeries::from).collect())
        .collect())
}

/// Sup-norm over `points` of the quadrature residual `D^a u - rhs(u)`.
#[pyfunction]
fn residual(problem: PyRef<'_, PyProblem>, iterates: Vec<PyRef<'_, PySeries>>, points: Vec<f64>) -> PyResult<f64> {
    let series: Vec<FracSeries> = iterates.iter().map(|s| s.inner.clone()).collect();
    residual_sup_norm(&problem.inner, &series, &points, QuadSpec::default()).map_err(to_py)
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    fraccalc::gamma(x).map_err(to_py)
}

#[pyfunction]
fn beta(a: f64, b: f64) -> PyResult<f64> {
    fraccalc::beta(a, b).map_err(to_py)
}

/// Writes the benchmark CSVs into `outdir` and returns the comparison summary.
#[pyfunction]
fn reproduce(name: &str, outdir: PathBuf) -> PyResult<String> {
    Ok(report::reproduce(name, &outdir).map_err(to_py)?.summary)
}

#[pymodule]
fn fide_pia(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySeries>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(beta, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
