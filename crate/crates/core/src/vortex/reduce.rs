use std::f64::consts::PI;

use super::spec::{
    ClassicalVortexSpec, GeneralizedSpec, MixedVortexSpec, Normalization, VortexSpec,
};
use super::{Result, VortexError};
use crate::field::{spectral, Point, ScalarField, TorusGeometry};
use crate::green::{divisor_potential, torus_green, vanishing_density, Divisor};
use crate::kw::{ExpTerm, KWProblem};

/// `P = factor · e^{u_D}` sampled on the grid, with the factor kept for
/// off-grid evaluation.
#[derive(Debug, Clone)]
pub(crate) struct Density {
    pub field: ScalarField,
    pub weight: i32,
    pub divisor: Divisor,
    pub factor: f64,
}

impl Density {
    /// Analytic value at an arbitrary point (zero on the divisor).
    pub fn at(&self, geometry: &TorusGeometry, p: Point) -> Result<f64> {
        let mut u = 0.0;
        for (c, m) in self.divisor.iter() {
            let (dx, dy) = geometry.displacement(c, p);
            let g = torus_green(Point::new(dx, dy), geometry)?;
            if g == f64::NEG_INFINITY {
                return Ok(0.0);
            }
            u += 4.0 * PI * m as f64 * g;
        }
        Ok(self.factor * u.exp())
    }
}

fn build_density(
    divisor: &Divisor,
    weight: i32,
    scale: f64,
    normalization: Normalization,
    spec: &VortexSpec,
) -> Result<Density> {
    let (geometry, grid) = (*spec.geometry(), *spec.grid());
    let potential = divisor_potential(divisor, geometry, grid)?;
    let raw = vanishing_density(&potential, 1.0)?;
    let factor = match normalization {
        Normalization::Raw => scale,
        Normalization::UnitMean => scale / raw.mean(),
        Normalization::UnitIntegral => scale / raw.integrate(),
    };
    if !(factor.is_finite() && factor > 0.0) {
        return Err(VortexError::InvalidSpec(format!(
            "density for weight {weight} cannot be normalized (factor {factor})"
        )));
    }
    Ok(Density {
        field: raw.scale(factor),
        weight,
        divisor: divisor.clone(),
        factor,
    })
}

pub(crate) fn densities(spec: &VortexSpec) -> Result<Vec<Density>> {
    match spec {
        VortexSpec::Classical(s) => Ok(vec![build_density(
            &s.divisor,
            1,
            1.0,
            Normalization::Raw,
            spec,
        )?]),
        VortexSpec::Mixed(s) => Ok(vec![
            build_density(&s.divisor_plus, 1, s.scale_plus, s.normalization, spec)?,
            build_density(&s.divisor_minus, -1, s.scale_minus, s.normalization, spec)?,
        ]),
        VortexSpec::Generalized(s) => s
            .terms
            .iter()
            .map(|t| build_density(&t.divisor, t.weight, t.scale, s.normalization, spec))
            .collect(),
    }
}

/// The problem at an arbitrary `ε ≥ 0` (the spec's own `ε` is ignored).
pub(crate) fn reduce_at(spec: &VortexSpec, dens: &[Density], epsilon: f64) -> Result<KWProblem> {
    let (geometry, grid) = (*spec.geometry(), *spec.grid());
    let vol = geometry.volume();
    let d = spec.degree();
    let e2 = epsilon * epsilon;
    let problem = match spec {
        VortexSpec::Classical(_) => KWProblem::new(
            e2,
            vec![ExpTerm::new(dens[0].field.scale(2.0), 1.0)],
            vec![],
            ScalarField::constant(geometry, grid, 4.0 * PI * e2 * d / vol - 2.0),
        )?,
        VortexSpec::Mixed(MixedVortexSpec { tau, .. })
        | VortexSpec::Generalized(GeneralizedSpec { tau, .. }) => {
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            for t in dens {
                let k = t.weight.unsigned_abs() as f64;
                let term = ExpTerm::new(t.field.scale(k), k);
                if t.weight > 0 {
                    plus.push(term);
                } else {
                    minus.push(term);
                }
            }
            let w = 2.0 * PI * d * e2 / vol + tau;
            KWProblem::new(
                0.5 * e2,
                plus,
                minus,
                ScalarField::constant(geometry, grid, w),
            )?
        }
    };
    Ok(problem)
}

/// `ε² Δ_Hodge v + 2 e^{u_D} e^v + 4πε²d/Vol - 2 = 0` for `v = log|φ|² - u_D`.
pub fn reduce_classical(spec: &ClassicalVortexSpec) -> Result<KWProblem> {
    reduce(&VortexSpec::Classical(spec.clone()))
}

/// `(ε²/2) Δ_Hodge f̃ + P e^{f̃} - Q e^{-f̃} + 2πdε²/Vol + τ = 0`.
pub fn reduce_mixed(spec: &MixedVortexSpec) -> Result<KWProblem> {
    reduce(&VortexSpec::Mixed(spec.clone()))
}

/// Positive weights `k` give plus terms `k P e^{k f̃}`, negative weights
/// `-b` give minus terms `b P e^{-b f̃}`; `ε → ε²/2`, `w = 2πd̄ε²/Vol + τ`.
pub fn reduce_generalized(spec: &GeneralizedSpec) -> Result<KWProblem> {
    reduce(&VortexSpec::Generalized(spec.clone()))
}

pub fn reduce(spec: &VortexSpec) -> Result<KWProblem> {
    spec.validate()?;
    let dens = densities(spec)?;
    reduce_at(spec, &dens, spec.epsilon())
}

/// Densities recovered from a solution of the reduced problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// `|φ^j|²` per density term.
    pub phi_sq_fields: Vec<ScalarField>,
    /// `iΛF`: `(1 - |φ|²)/ε²` for classical vortices, `-½Δf̃ + 2πd̄/Vol`
    /// otherwise.
    pub curvature_density: ScalarField,
    /// `-½Δf + 2πd/Vol` in every case; equals `curvature_density` except in
    /// the classical case, where it is an independent cross-check.
    pub gauge_curvature: ScalarField,
}

pub(crate) fn reconstruct_with(
    spec: &VortexSpec,
    dens: &[Density],
    f: &ScalarField,
    epsilon: f64,
) -> Result<Reconstruction> {
    dens[0].field.ensure_compatible(f)?;
    let vol = spec.geometry().volume();
    let background = 2.0 * PI * spec.degree() / vol;
    let phi_sq_fields = dens
        .iter()
        .map(|t| {
            t.field.zip_map(f, |p, v| {
                if p == 0.0 {
                    0.0
                } else {
                    p * (t.weight as f64 * v).exp()
                }
            })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let gauge_curvature = spectral::laplacian(f).map(|l| -0.5 * l + background);
    let curvature_density = match spec {
        VortexSpec::Classical(_) => phi_sq_fields[0].map(|p| (1.0 - p) / (epsilon * epsilon)),
        _ => gauge_curvature.clone(),
    };
    Ok(Reconstruction {
        phi_sq_fields,
        curvature_density,
        gauge_curvature,
    })
}

pub fn reconstruct(spec: &VortexSpec, f: &ScalarField) -> Result<Reconstruction> {
    let dens = densities(spec)?;
    reconstruct_with(spec, &dens, f, spec.epsilon())
}
