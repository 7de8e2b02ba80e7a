use super::{FieldError, GridSpec, Point, Result, ScalarField, TorusGeometry};

/// Per-sample weights in `[0, 1]` selecting a region of the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    geometry: TorusGeometry,
    grid: GridSpec,
    weights: Vec<f64>,
}

impl RegionMask {
    pub fn full(geometry: TorusGeometry, grid: GridSpec) -> Self {
        RegionMask {
            geometry,
            grid,
            weights: vec![1.0; grid.len()],
        }
    }

    pub fn from_weights(
        geometry: TorusGeometry,
        grid: GridSpec,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(FieldError::WrongLength {
                expected: grid.len(),
                got: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(FieldError::BadMaskWeight(w));
        }
        Ok(RegionMask {
            geometry,
            grid,
            weights,
        })
    }

    /// Weight 0 within torus distance `radius` of any of `points`, 1 elsewhere.
    pub fn excluding_discs(
        geometry: TorusGeometry,
        grid: GridSpec,
        points: &[Point],
        radius: f64,
    ) -> Self {
        let (hx, hy) = grid.spacing(&geometry);
        let mut weights = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let p = Point::new(i as f64 * hx, j as f64 * hy);
                let inside = points.iter().any(|&c| geometry.distance(p, c) < radius);
                weights.push(if inside { 0.0 } else { 1.0 });
            }
        }
        RegionMask {
            geometry,
            grid,
            weights,
        }
    }

    /// Samples flagged `true` are removed from the mask.
    pub fn excluding_samples(mut self, excluded: &[bool]) -> Result<Self> {
        if excluded.len() != self.weights.len() {
            return Err(FieldError::WrongLength {
                expected: self.weights.len(),
                got: excluded.len(),
            });
        }
        for (w, &e) in self.weights.iter_mut().zip(excluded) {
            if e {
                *w = 0.0;
            }
        }
        Ok(self)
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn area(&self) -> f64 {
        super::pairwise_sum(&self.weights) / self.weights.len() as f64 * self.geometry.volume()
    }

    pub(crate) fn ensure_matches(&self, field: &ScalarField) -> Result<()> {
        if *field.geometry() == self.geometry && *field.grid() == self.grid {
            Ok(())
        } else {
            Err(FieldError::Incompatible)
        }
    }
}
