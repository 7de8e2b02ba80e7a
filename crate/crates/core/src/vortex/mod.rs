//! Vortex families reduced to Kazdan–Warner problems over divisor data,
//! reconstruction of the gauge-theoretic densities, and adiabatic-limit
//! diagnostics.
//!
//! Conventions. For a classical vortex with zero divisor `D` of degree `d`,
//! `|φ|² = e^{u_D + v}` and `iΛF = -½Δv + 2πd/Vol = (1 - |φ|²)/ε²`. For the
//! mixed and generalized families the unknown `f̃` enters as
//! `|φ^j|² = P_j e^{k_j f̃}` with `P_j = scale_j e^{u_{D_j}}` and
//! `iΛF = -½Δf̃ + 2πd̄/Vol`, so `ε² iΛF + Σ k_j |φ^j|² + τ = 0` becomes
//! `-(ε²/2) Δf̃ + Σ k_j P_j e^{k_j f̃} + τ + 2πd̄ε²/Vol = 0`.

mod diagnostics;
mod reduce;
mod spec;
mod sweep;

pub use diagnostics::{
    curvature_mass, default_bump_radii, integral_identities, vanishing_order_fit,
    vanishing_order_fit_with, IdentityResiduals,
};
pub use reduce::{
    reconstruct, reduce, reduce_classical, reduce_generalized, reduce_mixed, Reconstruction,
};
pub use spec::{
    ClassicalVortexSpec, GeneralizedSpec, GeneralizedTerm, MixedVortexSpec, Normalization,
    SingularPoint, VortexSpec,
};
pub use sweep::{adiabatic_sweep, DiagnosticsConfig, DiagnosticsReport, SweepError, SweepReport};

use thiserror::Error;

use crate::field::FieldError;
use crate::green::GreenError;
use crate::kw::KwError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VortexError {
    #[error("Bradlow: 2πdε² ≥ Vol (d = {degree}, ε = {epsilon}, 2πdε² = {lhs}, Vol = {volume})")]
    BradlowViolation {
        degree: i64,
        epsilon: f64,
        lhs: f64,
        volume: f64,
    },
    #[error("unsolvable: {0}")]
    Unsolvable(String),
    #[error("invalid vortex data: {0}")]
    InvalidSpec(String),
    #[error("divisor point {other} lies within the outer bump radius {r_outer} of the centre")]
    OverlappingBump { other: usize, r_outer: f64 },
    #[error("vanishing-order fit is degenerate: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Kw(#[from] KwError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Result<T> = std::result::Result<T, VortexError>;
