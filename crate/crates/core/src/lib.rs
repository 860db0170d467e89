//! Fractional power series, fractional calculus on them, and a perturbation
//! iteration solver for systems of fractional integro-differential equations.

pub mod error;
pub mod fraccalc;
pub mod fracseries;
pub mod oracle;
pub mod pia;
pub mod problem;
pub mod report;

pub use error::{Error, Result};
pub use fraccalc::{beta, caputo, gamma, rl_derivative, rl_integral, FracOrder};
pub use fracseries::{FracSeries, RationalExp, Term};
pub use pia::{solve, trajectory, PiaConfig, PiaState};
pub use problem::{builtin, load_problem, FideProblem};
