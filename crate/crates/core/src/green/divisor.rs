use serde::{Deserialize, Serialize};

use super::{GreenError, Result};
use crate::field::{Point, TorusGeometry};

/// Points closer than this fraction of the shorter period are the same point.
const COINCIDENCE: f64 = 1e-12;

fn coincide(geometry: &TorusGeometry, a: Point, b: Point) -> bool {
    geometry.distance(a, b) <= COINCIDENCE * geometry.length_x().min(geometry.length_y())
}

/// A finite formal sum `Σ m_k x_k` of torus points with nonzero integer
/// multiplicities. Points are stored reduced to the fundamental domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divisor {
    points: Vec<Point>,
    multiplicities: Vec<i32>,
}

impl Divisor {
    pub fn empty() -> Self {
        Divisor {
            points: Vec::new(),
            multiplicities: Vec::new(),
        }
    }

    pub fn new(
        geometry: &TorusGeometry,
        entries: impl IntoIterator<Item = (Point, i32)>,
    ) -> Result<Self> {
        let mut points = Vec::new();
        let mut multiplicities = Vec::new();
        for (k, (p, m)) in entries.into_iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(GreenError::NonFinitePoint(k));
            }
            if m == 0 {
                return Err(GreenError::ZeroMultiplicity(k));
            }
            let p = geometry.reduce(p);
            if let Some(j) = points
                .iter()
                .position(|q: &Point| coincide(geometry, *q, p))
            {
                return Err(GreenError::DuplicatePoint(j, k));
            }
            points.push(p);
            multiplicities.push(m);
        }
        Ok(Divisor {
            points,
            multiplicities,
        })
    }

    /// `m · x` for a single point.
    pub fn point(geometry: &TorusGeometry, p: Point, m: i32) -> Result<Self> {
        Self::new(geometry, [(p, m)])
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn multiplicities(&self) -> &[i32] {
        &self.multiplicities
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, i32)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.multiplicities.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.multiplicities.iter().map(|&m| m as i64).sum()
    }

    pub fn is_effective(&self) -> bool {
        self.multiplicities.iter().all(|&m| m > 0)
    }

    pub fn positive_part(&self) -> Divisor {
        self.filter(|m| m > 0, 1)
    }

    /// The points with negative multiplicity, as an effective divisor, so that
    /// `D = positive_part() - negative_part()`.
    pub fn negative_part(&self) -> Divisor {
        self.filter(|m| m < 0, -1)
    }

    fn filter(&self, keep: impl Fn(i32) -> bool, sign: i32) -> Divisor {
        let (points, multiplicities) = self
            .iter()
            .filter(|&(_, m)| keep(m))
            .map(|(p, m)| (p, sign * m))
            .unzip();
        Divisor {
            points,
            multiplicities,
        }
    }

    /// Formal sum; coincident points merge and cancelled points disappear.
    pub fn sum(&self, other: &Divisor, geometry: &TorusGeometry) -> Divisor {
        self.combine(other, 1, geometry)
    }

    /// Formal difference `self - other`.
    pub fn difference(&self, other: &Divisor, geometry: &TorusGeometry) -> Divisor {
        self.combine(other, -1, geometry)
    }

    fn combine(&self, other: &Divisor, sign: i32, geometry: &TorusGeometry) -> Divisor {
        let mut points = self.points.clone();
        let mut multiplicities = self.multiplicities.clone();
        for (p, m) in other.iter() {
            match points.iter().position(|q| coincide(geometry, *q, p)) {
                Some(k) => multiplicities[k] += sign * m,
                None => {
                    points.push(p);
                    multiplicities.push(sign * m);
                }
            }
        }
        let (points, multiplicities) = points
            .into_iter()
            .zip(multiplicities)
            .filter(|&(_, m)| m != 0)
            .unzip();
        Divisor {
            points,
            multiplicities,
        }
    }

    pub fn translate(&self, geometry: &TorusGeometry, dx: f64, dy: f64) -> Divisor {
        Divisor {
            points: self
                .points
                .iter()
                .map(|p| geometry.reduce(Point::new(p.x + dx, p.y + dy)))
                .collect(),
            multiplicities: self.multiplicities.clone(),
        }
    }

    /// Smallest torus distance between two distinct points, if any.
    pub fn min_separation(&self, geometry: &TorusGeometry) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                let d = geometry.distance(self.points[i], self.points[j]);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }
}
