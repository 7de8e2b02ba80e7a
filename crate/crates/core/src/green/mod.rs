//! Torus Green's function, divisors, and the singular potentials `u_D`.
//!
//! With `z = (x + iy)/lx` and `τ = i ly/lx`,
//! `g(z) = log|ϑ₁(z|τ)| - π (Im z)² / Im τ` is doubly periodic and satisfies
//! `Δg = 2π δ - 2π / Im τ` in the variable `z`. Rescaling to physical
//! coordinates gives `G = g / 2π` with `Δ G = δ₀ - 1/Vol`.

mod divisor;
mod potential;
mod theta;

pub use divisor::Divisor;
pub use potential::{
    divisor_potential, torus_green, torus_green_gradient, vanishing_density, DivisorPotential,
    SINGULAR_SENTINEL,
};
pub use theta::{theta1, theta1_prime, DEFAULT_THETA_TERMS};

use thiserror::Error;

use crate::field::FieldError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error("theta nome parameter needs Im τ > 0 (got {0} + {1}i)")]
    BadTau(f64, f64),
    #[error("theta series needs at least 8 terms (got {0})")]
    TooFewTerms(usize),
    #[error("aspect ratio ly/lx = {0} is below 0.1; theta series would converge too slowly")]
    ExtremeAspect(f64),
    #[error("multiplicity must be nonzero (point {0})")]
    ZeroMultiplicity(usize),
    #[error("divisor points {0} and {1} coincide modulo periods")]
    DuplicatePoint(usize, usize),
    #[error("non-finite divisor point {0}")]
    NonFinitePoint(usize),
    #[error("density requires an effective divisor (multiplicity {0} at point {1})")]
    MixedSignDivisor(i32, usize),
    #[error("density scale must be positive (got {0})")]
    BadScale(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Result<T> = std::result::Result<T, GreenError>;
