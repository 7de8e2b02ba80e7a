//! Scalar fields on a flat rectangular torus.
//!
//! Every field is sampled on a uniform periodic grid; sample `(i, j)` sits at
//! `(i * lx / nx, j * ly / ny)` and is stored at index `j * nx + i`. The
//! differential operators in [`spectral`] use the analyst's Laplacian
//! `∂²ₓ + ∂²ᵧ`; the nonnegative Hodge Laplacian is its negative.

mod cutoff;
mod linear;
mod mask;
pub mod spectral;
mod sum;

pub use cutoff::{bump_cutoff, cutoff_derivative, cutoff_profile, cutoff_ratio_sup};
pub use linear::{solve_linearized, solve_linearized_best, solve_linearized_with, LinearSolve};
pub use mask::RegionMask;
pub use spectral::{gradient, laplacian, sample_at, FourierInterpolant};
pub use sum::pairwise_sum;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid geometry: side lengths must be finite and positive (got {0} x {1})")]
    InvalidGeometry(f64, f64),
    #[error("invalid grid {0} x {1}: both sizes must be even and at least 8")]
    InvalidGrid(usize, usize),
    #[error("fields live on different tori or grids")]
    Incompatible,
    #[error("expected {expected} samples, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("region mask has zero area")]
    EmptyMask,
    #[error("mask weight {0} outside [0, 1]")]
    BadMaskWeight(f64),
    #[error("linear solve did not converge after {iterations} iterations (relative residual {relative_residual:e})")]
    NoConvergence {
        iterations: usize,
        relative_residual: f64,
    },
    #[error("potential must be strictly positive (min {0:e})")]
    NonPositivePotential(f64),
    #[error("cutoff radii must satisfy 0 < r_inner < r_outer < min(lx, ly)/2 (got {r_inner}, {r_outer})")]
    BadRadii { r_inner: f64, r_outer: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, FieldError>;

/// A point on the torus in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

/// Side lengths of the flat torus `R² / (lx Z × ly Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGeometry {
    length_x: f64,
    length_y: f64,
}

impl TorusGeometry {
    pub fn new(length_x: f64, length_y: f64) -> Result<Self> {
        if !(length_x.is_finite() && length_y.is_finite() && length_x > 0.0 && length_y > 0.0) {
            return Err(FieldError::InvalidGeometry(length_x, length_y));
        }
        Ok(TorusGeometry { length_x, length_y })
    }

    pub fn unit() -> Self {
        TorusGeometry {
            length_x: 1.0,
            length_y: 1.0,
        }
    }

    pub fn length_x(&self) -> f64 {
        self.length_x
    }

    pub fn length_y(&self) -> f64 {
        self.length_y
    }

    pub fn volume(&self) -> f64 {
        self.length_x * self.length_y
    }

    /// Representative of `p` in `[0, lx) × [0, ly)`.
    pub fn reduce(&self, p: Point) -> Point {
        Point::new(wrap(p.x, self.length_x), wrap(p.y, self.length_y))
    }

    /// Shortest displacement `to - from`, each component in `[-l/2, l/2)`.
    pub fn displacement(&self, from: Point, to: Point) -> (f64, f64) {
        (
            centered(to.x - from.x, self.length_x),
            centered(to.y - from.y, self.length_y),
        )
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let (dx, dy) = self.displacement(a, b);
        dx.hypot(dy)
    }
}

fn wrap(v: f64, l: f64) -> f64 {
    let r = v.rem_euclid(l);
    // rem_euclid can round up to exactly l for tiny negative inputs
    if r >= l {
        0.0
    } else {
        r
    }
}

pub(crate) fn centered(v: f64, l: f64) -> f64 {
    let r = wrap(v + 0.5 * l, l) - 0.5 * l;
    if r >= 0.5 * l {
        r - l
    } else {
        r
    }
}

/// Number of samples per period in each direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 8 || ny < 8 || !nx.is_multiple_of(2) || !ny.is_multiple_of(2) {
            return Err(FieldError::InvalidGrid(nx, ny));
        }
        Ok(GridSpec { nx, ny })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, geometry: &TorusGeometry) -> (f64, f64) {
        (
            geometry.length_x / self.nx as f64,
            geometry.length_y / self.ny as f64,
        )
    }

    /// Largest of the two grid spacings.
    pub fn max_spacing(&self, geometry: &TorusGeometry) -> f64 {
        let (hx, hy) = self.spacing(geometry);
        hx.max(hy)
    }
}

/// Real samples of a function on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    geometry: TorusGeometry,
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(geometry: TorusGeometry, grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FieldError::WrongLength {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(i));
        }
        Ok(ScalarField {
            geometry,
            grid,
            values,
        })
    }

    pub(crate) fn from_values_unchecked(
        geometry: TorusGeometry,
        grid: GridSpec,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField {
            geometry,
            grid,
            values,
        }
    }

    pub fn constant(geometry: TorusGeometry, grid: GridSpec, c: f64) -> Self {
        assert!(c.is_finite(), "constant field value must be finite");
        ScalarField {
            geometry,
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(geometry: TorusGeometry, grid: GridSpec) -> Self {
        Self::constant(geometry, grid, 0.0)
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(
        geometry: TorusGeometry,
        grid: GridSpec,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let (hx, hy) = grid.spacing(&geometry);
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(i as f64 * hx, j as f64 * hy));
            }
        }
        Self::from_values(geometry, grid, values)
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.grid.nx + i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    /// Physical coordinates of sample `k`.
    pub fn coords(&self, k: usize) -> Point {
        let (hx, hy) = self.grid.spacing(&self.geometry);
        Point::new(
            (k % self.grid.nx) as f64 * hx,
            (k / self.grid.nx) as f64 * hy,
        )
    }

    pub fn is_compatible(&self, other: &ScalarField) -> bool {
        self.geometry == other.geometry && self.grid == other.grid
    }

    pub fn ensure_compatible(&self, other: &ScalarField) -> Result<()> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(FieldError::Incompatible)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            geometry: self.geometry,
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.ensure_compatible(other)?;
        Ok(ScalarField {
            geometry: self.geometry,
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute sample.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    /// Periodic trapezoid rule: `mean * volume`.
    pub fn integrate(&self) -> f64 {
        self.mean() * self.geometry.volume()
    }

    /// `∫ self * other`.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.ensure_compatible(other)?;
        let prod: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(pairwise_sum(&prod) / prod.len() as f64 * self.geometry.volume())
    }

    /// `(∫ |f|²)^{1/2}` over the whole torus.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        (pairwise_sum(&sq) / sq.len() as f64 * self.geometry.volume()).sqrt()
    }

    /// Euclidean norm of the sample vector.
    #[cfg(test)]
    pub(crate) fn vec_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        pairwise_sum(&sq).sqrt()
    }

    /// Largest |self - other| over all samples.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        self.ensure_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs())))
    }

    /// Translate the field by a whole number of grid cells.
    pub fn shift_cells(&self, di: isize, dj: isize) -> ScalarField {
        let (nx, ny) = (self.grid.nx as isize, self.grid.ny as isize);
        let mut out = vec![0.0; self.values.len()];
        for j in 0..ny {
            for i in 0..nx {
                let si = (i - di).rem_euclid(nx);
                let sj = (j - dj).rem_euclid(ny);
                out[(j * nx + i) as usize] = self.values[(sj * nx + si) as usize];
            }
        }
        ScalarField::from_values_unchecked(self.geometry, self.grid, out)
    }

    /// Integrate against a mask: `∫ w f`.
    pub fn integrate_masked(&self, mask: &RegionMask) -> Result<f64> {
        mask.ensure_matches(self)?;
        let prod: Vec<f64> = self
            .values
            .iter()
            .zip(mask.weights())
            .map(|(a, w)| a * w)
            .collect();
        Ok(pairwise_sum(&prod) / prod.len() as f64 * self.geometry.volume())
    }

    pub fn lp_norm(&self, p: f64, mask: &RegionMask) -> Result<f64> {
        lp_norm(self, p, mask)
    }

    pub fn sup_norm(&self, mask: &RegionMask) -> Result<f64> {
        sup_norm(self, mask)
    }
}

/// `∫ f` by the periodic trapezoid rule.
pub fn integrate(field: &ScalarField) -> f64 {
    field.integrate()
}

/// `(∫ mask |f|^p)^{1/p}`.
pub fn lp_norm(field: &ScalarField, p: f64, mask: &RegionMask) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(FieldError::InvalidArgument(format!(
            "p must be >= 1, got {p}"
        )));
    }
    mask.ensure_matches(field)?;
    if mask.area() <= 0.0 {
        return Err(FieldError::EmptyMask);
    }
    let terms: Vec<f64> = field
        .values
        .iter()
        .zip(mask.weights())
        .map(|(v, w)| if *w == 0.0 { 0.0 } else { w * v.abs().powf(p) })
        .collect();
    let integral = pairwise_sum(&terms) / terms.len() as f64 * field.geometry.volume();
    Ok(integral.powf(1.0 / p))
}

/// Max |f| over samples whose mask weight exceeds 1/2.
pub fn sup_norm(field: &ScalarField, mask: &RegionMask) -> Result<f64> {
    mask.ensure_matches(field)?;
    let mut any = false;
    let mut m: f64 = 0.0;
    for (v, &w) in field.values.iter().zip(mask.weights()) {
        if w > 0.5 {
            any = true;
            m = m.max(v.abs());
        }
    }
    if any {
        Ok(m)
    } else {
        Err(FieldError::EmptyMask)
    }
}
