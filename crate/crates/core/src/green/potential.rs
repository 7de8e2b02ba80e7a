use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::theta::DEFAULT_THETA_TERMS;
use super::{Divisor, GreenError, Result};
use crate::field::{centered, GridSpec, Point, ScalarField, TorusGeometry};

/// Stand-in for `log 0 = -∞` at samples that coincide exactly with a divisor
/// point. `exp` of it is exactly zero.
pub const SINGULAR_SENTINEL: f64 = -1.0e300;

const MIN_ASPECT: f64 = 0.1;

/// Precomputed theta coefficients for one torus.
struct GreenKernel {
    lx: f64,
    ly: f64,
    volume: f64,
    // 2 (-1)ⁿ q^{(n+1/2)²}
    coefficients: Vec<f64>,
}

impl GreenKernel {
    fn new(geometry: &TorusGeometry) -> Result<Self> {
        let (lx, ly) = (geometry.length_x(), geometry.length_y());
        let aspect = ly / lx;
        if aspect < MIN_ASPECT {
            return Err(GreenError::ExtremeAspect(aspect));
        }
        // τ = i ly/lx, so q = e^{-π ly/lx} is real
        let coefficients = (0..DEFAULT_THETA_TERMS)
            .map(|n| {
                let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
                sign * (-PI * aspect * (n as f64 + 0.5).powi(2)).exp()
            })
            .collect();
        Ok(GreenKernel {
            lx,
            ly,
            volume: lx * ly,
            coefficients,
        })
    }

    fn theta(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        for (n, &c) in self.coefficients.iter().enumerate() {
            let w = (2 * n + 1) as f64 * PI;
            let (s, co) = ((w * z).sin(), (w * z).cos());
            value += c * s;
            deriv += c * w * co;
        }
        (value, deriv)
    }

    /// Closed form without reducing the argument first.
    fn raw(&self, x: f64, y: f64) -> f64 {
        let z = Complex64::new(x, y) / self.lx;
        let (t, _) = self.theta(z);
        (t.norm().ln() - PI * y * y / self.volume) / (2.0 * PI)
    }

    fn value(&self, dx: f64, dy: f64) -> f64 {
        let (x, y) = (centered(dx, self.lx), centered(dy, self.ly));
        if x == 0.0 && y == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.raw(x, y)
    }

    fn gradient(&self, dx: f64, dy: f64) -> (f64, f64) {
        let (x, y) = (centered(dx, self.lx), centered(dy, self.ly));
        let z = Complex64::new(x, y) / self.lx;
        let (t, dt) = self.theta(z);
        let logd = dt / t / self.lx;
        (
            logd.re / (2.0 * PI),
            -logd.im / (2.0 * PI) - y / self.volume,
        )
    }
}

/// Green's function of the flat torus with `Δ G = δ₀ - 1/Vol`,
/// `G = (1/2π)[log|ϑ₁(z | i ly/lx)| - π y²/(lx ly)]`, `z = (x + iy)/lx`,
/// evaluated after reducing the point to the centred fundamental domain.
/// Returns `-∞` at lattice points.
pub fn torus_green(point: Point, geometry: &TorusGeometry) -> Result<f64> {
    Ok(GreenKernel::new(geometry)?.value(point.x, point.y))
}

/// Closed-form `∇G` (undefined at lattice points).
pub fn torus_green_gradient(point: Point, geometry: &TorusGeometry) -> Result<(f64, f64)> {
    Ok(GreenKernel::new(geometry)?.gradient(point.x, point.y))
}

#[cfg(test)]
pub(crate) fn torus_green_unreduced(point: Point, geometry: &TorusGeometry) -> f64 {
    GreenKernel::new(geometry).unwrap().raw(point.x, point.y)
}

/// `u_D = Σ_k 4π m_k G(x - x_k)` sampled on a grid, so that
/// `Δ u_D = 4π Σ m_k δ_{x_k} - 4π deg(D)/Vol` and `u_D ≈ 2 m_k log r` near
/// each point.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorPotential {
    divisor: Divisor,
    u: ScalarField,
}

impl DivisorPotential {
    pub fn divisor(&self) -> &Divisor {
        &self.divisor
    }

    pub fn field(&self) -> &ScalarField {
        &self.u
    }

    pub fn into_field(self) -> ScalarField {
        self.u
    }

    /// Same potential shifted to zero sample mean (sentinel samples are
    /// left untouched and excluded from the mean).
    pub fn recentered(&self) -> DivisorPotential {
        let regular: Vec<f64> = self
            .u
            .values()
            .iter()
            .copied()
            .filter(|v| v.abs() < 1e299)
            .collect();
        if regular.is_empty() {
            return self.clone();
        }
        let mean = crate::field::pairwise_sum(&regular) / regular.len() as f64;
        let u = self.u.map(|v| if v.abs() < 1e299 { v - mean } else { v });
        DivisorPotential {
            divisor: self.divisor.clone(),
            u,
        }
    }
}

pub fn divisor_potential(
    divisor: &Divisor,
    geometry: TorusGeometry,
    grid: GridSpec,
) -> Result<DivisorPotential> {
    let kernel = GreenKernel::new(&geometry)?;
    let (hx, hy) = grid.spacing(&geometry);
    let nx = grid.nx();
    let entries: Vec<(Point, i32)> = divisor.iter().collect();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let p = Point::new((k % nx) as f64 * hx, (k / nx) as f64 * hy);
            let mut u = 0.0;
            for &(c, m) in &entries {
                let g = kernel.value(p.x - c.x, p.y - c.y);
                if g == f64::NEG_INFINITY {
                    return if m > 0 {
                        SINGULAR_SENTINEL
                    } else {
                        -SINGULAR_SENTINEL
                    };
                }
                u += 4.0 * PI * m as f64 * g;
            }
            u
        })
        .collect();
    Ok(DivisorPotential {
        divisor: divisor.clone(),
        u: ScalarField::from_values(geometry, grid, values)?,
    })
}

/// `scale · exp(u_D)` for an effective divisor: nonnegative, vanishing to
/// order `2 m_k` at each `x_k`, and exactly zero at sentinel samples.
pub fn vanishing_density(potential: &DivisorPotential, scale: f64) -> Result<ScalarField> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(GreenError::BadScale(scale));
    }
    if let Some((k, &m)) = potential
        .divisor
        .multiplicities()
        .iter()
        .enumerate()
        .find(|(_, &m)| m < 0)
    {
        return Err(GreenError::MixedSignDivisor(m, k));
    }
    Ok(potential.u.map(|u| {
        if u <= SINGULAR_SENTINEL {
            0.0
        } else {
            scale * u.exp()
        }
    }))
}
