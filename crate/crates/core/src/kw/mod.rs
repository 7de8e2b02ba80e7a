//! The generalized Kazdan–Warner equation
//! `-ε Δf + Σ A_j e^{α_j f} - Σ B_j e^{-β_j f} + w = 0` on a flat torus:
//! residual and convex energy, damped Newton solves, the `ε = 0` pointwise
//! limit, `ε`-continuation and a priori probes.

mod continuation;
mod inequality;
mod limit;
mod probe;
mod problem;
mod solver;

pub use continuation::{
    continuation_sweep, ContinuationSchedule, GridChoice, RefineRule, SweepFailure,
};
pub use inequality::{young_bound, YoungBound};
pub use limit::{kw_limit, LimitProfile};
pub use probe::{apriori_probe, probe_row, probe_row_local, ProbeRow, ProbeTable};
pub use problem::{kw_energy, kw_residual, Classification, ExpTerm, KWProblem, EXPONENT_GUARD};
pub use solver::{kw_solve, KWSolution, SolverConfig};

use thiserror::Error;

use crate::field::FieldError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KwError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("coefficient of term {term} is negative (min {value:e})")]
    NegativeCoefficient { term: usize, value: f64 },
    #[error("exponent argument {argument} at sample {index} exceeds the overflow guard")]
    OverflowGuard { index: usize, argument: f64 },
    #[error("unsolvable: {0}")]
    Unsolvable(String),
    #[error("Newton iteration stopped after {iterations} steps with sup residual {residual:e}")]
    MaxIterExceeded { iterations: usize, residual: f64 },
    #[error("line search failed at Newton step {iteration} (sup residual {residual:e})")]
    LineSearchFailed { iteration: usize, residual: f64 },
    #[error("no root of the pointwise balance at sample {index}")]
    NoRoot { index: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("all arguments must be positive and finite")]
    NonPositiveInput,
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Result<T> = std::result::Result<T, KwError>;
