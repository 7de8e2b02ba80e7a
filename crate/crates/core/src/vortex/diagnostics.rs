use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::reduce::{densities, reconstruct_with};
use super::spec::VortexSpec;
use super::{Result, VortexError};
use crate::field::{bump_cutoff, FourierInterpolant, Point, ScalarField, TorusGeometry};

/// Angles used for the angular average in order fits.
const FIT_ANGLES: usize = 64;

/// `∫ φ_bump · iΛF / 2π` over a bump around `center`.
///
/// `others` are the remaining divisor points; any of them inside `r_outer`
/// is an error, since the mass would mix two points.
pub fn curvature_mass(
    curvature_density: &ScalarField,
    center: Point,
    r_inner: f64,
    r_outer: f64,
    others: &[Point],
) -> Result<f64> {
    let geometry = curvature_density.geometry();
    for (k, &p) in others.iter().enumerate() {
        let d = geometry.distance(p, center);
        if d > 1e-12 && d < r_outer {
            return Err(VortexError::OverlappingBump { other: k, r_outer });
        }
    }
    let bump = bump_cutoff(
        *geometry,
        *curvature_density.grid(),
        center,
        r_inner,
        r_outer,
    )?;
    Ok(bump.mul(curvature_density)?.integrate() / (2.0 * PI))
}

/// Default bump radii `(3ε + 4h, 6ε + 8h)`, shrunk so the outer radius stays
/// below `0.45 min(lx, ly)` and half the distance to the nearest other point.
pub fn default_bump_radii(
    epsilon: f64,
    spacing: f64,
    geometry: &TorusGeometry,
    center: Point,
    others: &[Point],
) -> (f64, f64) {
    let nearest = others
        .iter()
        .map(|&p| geometry.distance(p, center))
        .filter(|&d| d > 1e-12)
        .fold(f64::INFINITY, f64::min);
    let r_outer = (6.0 * epsilon + 8.0 * spacing)
        .min(0.45 * geometry.length_x().min(geometry.length_y()))
        .min(0.5 * nearest);
    let r_inner = (3.0 * epsilon + 4.0 * spacing).min(0.5 * r_outer);
    (r_inner, r_outer)
}

/// Least-squares slope of `log ⟨√phi_sq⟩` against `log r` over `n_samples`
/// log-spaced radii in `[r_min, r_max]`, with `⟨·⟩` the average over a circle
/// of Fourier-interpolated values. This is the vanishing order of `|φ|`.
pub fn vanishing_order_fit(
    phi_sq: &ScalarField,
    center: Point,
    r_min: f64,
    r_max: f64,
    n_samples: usize,
) -> Result<f64> {
    let h = phi_sq.grid().max_spacing(phi_sq.geometry());
    if r_min < 2.0 * h * (1.0 - 1e-12) {
        return Err(VortexError::DegenerateFit(format!(
            "r_min = {r_min} is below two grid cells ({})",
            2.0 * h
        )));
    }
    let interp = FourierInterpolant::new(phi_sq);
    vanishing_order_fit_with(|p| Ok(interp.eval(p)), center, r_min, r_max, n_samples)
}

/// [`vanishing_order_fit`] for an arbitrary evaluator of `|φ|²`.
pub fn vanishing_order_fit_with(
    phi_sq: impl Fn(Point) -> Result<f64>,
    center: Point,
    r_min: f64,
    r_max: f64,
    n_samples: usize,
) -> Result<f64> {
    if !(r_min > 0.0 && r_max > r_min && n_samples >= 2) {
        return Err(VortexError::DegenerateFit(format!(
            "need 0 < r_min < r_max and two samples (got {r_min}, {r_max}, {n_samples})"
        )));
    }
    let mut xs = Vec::with_capacity(n_samples);
    let mut ys = Vec::with_capacity(n_samples);
    let ratio = (r_max / r_min).ln();
    for s in 0..n_samples {
        let r = r_min * (ratio * s as f64 / (n_samples - 1) as f64).exp();
        let mut acc = 0.0;
        for a in 0..FIT_ANGLES {
            let theta = 2.0 * PI * (a as f64 + 0.5) / FIT_ANGLES as f64;
            let p = Point::new(center.x + r * theta.cos(), center.y + r * theta.sin());
            acc += phi_sq(p)?.max(0.0).sqrt();
        }
        let mean = acc / FIT_ANGLES as f64;
        if mean > 0.0 && mean.is_finite() {
            xs.push(r.ln());
            ys.push(mean.ln());
        }
    }
    if xs.len() < 2 {
        return Err(VortexError::DegenerateFit(
            "|φ|² underflows at the probe radii".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Residuals of the integrated field equation and of the Chern number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `∫(1 - |φ|²) - 2πdε²` (classical) or `Σ k_j ‖φ^j‖² + τ Vol + 2πd̄ε²`.
    pub integrated: f64,
    /// `∫ iΛF / 2π - d`.
    pub chern: f64,
}

/// Identities obtained by integrating the vortex equation over the torus,
/// evaluated on a solution `f` of the reduced problem.
pub fn integral_identities(spec: &VortexSpec, f: &ScalarField) -> Result<IdentityResiduals> {
    let dens = densities(spec)?;
    identities_with(spec, &dens, f)
}

pub(crate) fn identities_with(
    spec: &VortexSpec,
    dens: &[super::reduce::Density],
    f: &ScalarField,
) -> Result<IdentityResiduals> {
    let eps = spec.epsilon();
    let rec = reconstruct_with(spec, dens, f, eps)?;
    let vol = spec.geometry().volume();
    let d = spec.degree();
    let chern_term = 2.0 * PI * d * eps * eps;
    let integrated = match spec {
        VortexSpec::Classical(_) => rec.phi_sq_fields[0].map(|p| 1.0 - p).integrate() - chern_term,
        VortexSpec::Mixed(s) => weighted_mass(&rec.phi_sq_fields, dens) + s.tau * vol + chern_term,
        VortexSpec::Generalized(s) => {
            weighted_mass(&rec.phi_sq_fields, dens) + s.tau * vol + chern_term
        }
    };
    Ok(IdentityResiduals {
        integrated,
        chern: rec.curvature_density.integrate() / (2.0 * PI) - d,
    })
}

fn weighted_mass(phi_sq: &[ScalarField], dens: &[super::reduce::Density]) -> f64 {
    phi_sq
        .iter()
        .zip(dens)
        .map(|(p, t)| t.weight as f64 * p.integrate())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    #[test]
    fn synthetic_power_profile() {
        let c = Point::new(0.5, 0.5);
        let exact = |p: Point| Ok(((p.x - 0.5).powi(2) + (p.y - 0.5).powi(2)).powi(2));
        let order = vanishing_order_fit_with(exact, c, 0.01, 0.1, 12).unwrap();
        assert!((order - 2.0).abs() < 1e-10, "{order}");

        // periodic stand-in for r⁴ on the grid: (sin²πx' + sin²πy')²/π⁴
        let g = TorusGeometry::unit();
        let grid = GridSpec::square(256).unwrap();
        let phi_sq = ScalarField::from_fn(g, grid, |x, y| {
            let s = (PI * (x - 0.5)).sin().powi(2) + (PI * (y - 0.5)).sin().powi(2);
            (s / (PI * PI)).powi(2)
        })
        .unwrap();
        let order = vanishing_order_fit(&phi_sq, c, 0.01, 0.04, 12).unwrap();
        assert!((order - 2.0).abs() < 0.02, "{order}");
    }

    #[test]
    fn fit_rejects_subgrid_radius_and_underflow() {
        let g = TorusGeometry::unit();
        let grid = GridSpec::square(32).unwrap();
        let zero = ScalarField::zeros(g, grid);
        assert!(matches!(
            vanishing_order_fit(&zero, Point::new(0.5, 0.5), 0.01, 0.1, 8),
            Err(VortexError::DegenerateFit(_))
        ));
        assert!(matches!(
            vanishing_order_fit(&zero, Point::new(0.5, 0.5), 0.07, 0.2, 8),
            Err(VortexError::DegenerateFit(_))
        ));
    }

    #[test]
    fn constant_density_mass() {
        let g = TorusGeometry::unit();
        let grid = GridSpec::square(128).unwrap();
        let curv = ScalarField::constant(g, grid, 2.0 * PI);
        let c = Point::new(0.5, 0.5);
        let bump = bump_cutoff(g, grid, c, 0.2, 0.45).unwrap();
        let m = curvature_mass(&curv, c, 0.2, 0.45, &[]).unwrap();
        assert!((m - bump.integrate()).abs() < 1e-12);
    }

    #[test]
    fn overlapping_bump() {
        let g = TorusGeometry::unit();
        let grid = GridSpec::square(32).unwrap();
        let curv = ScalarField::zeros(g, grid);
        let c = Point::new(0.5, 0.5);
        let others = [c, Point::new(0.6, 0.5)];
        assert!(matches!(
            curvature_mass(&curv, c, 0.05, 0.2, &others),
            Err(VortexError::OverlappingBump { other: 1, .. })
        ));
        assert!(curvature_mass(&curv, c, 0.04, 0.08, &others).is_ok());
    }

    #[test]
    fn default_radii_respect_neighbours() {
        let g = TorusGeometry::unit();
        let c = Point::new(0.2, 0.2);
        let (ri, ro) = default_bump_radii(0.4, 0.01, &g, c, &[c, Point::new(0.6, 0.2)]);
        assert!((ro - 0.2).abs() < 1e-12 && (ri - 0.1).abs() < 1e-12);
        let (ri, ro) = default_bump_radii(0.01, 0.0025, &g, c, &[]);
        assert!((ro - 0.08).abs() < 1e-12 && (ri - 0.04).abs() < 1e-12);
    }
}
