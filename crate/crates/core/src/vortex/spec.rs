use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Result, VortexError};
use crate::field::{GridSpec, Point, TorusGeometry};
use crate::green::Divisor;

/// How the holomorphic densities `P_j = scale · e^{u_{D_j}}` are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `scale · e^{u_D} / mean(e^{u_D})`, so the density has mean `scale`.
    #[default]
    UnitMean,
    /// `scale · e^{u_D} / ∫ e^{u_D}`, so the density integrates to `scale`.
    UnitIntegral,
    /// `scale · e^{u_D}` as is.
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalVortexSpec {
    pub divisor: Divisor,
    pub epsilon: f64,
    pub geometry: TorusGeometry,
    pub grid: GridSpec,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(VortexError::InvalidSpec(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

fn check_effective(divisor: &Divisor, name: &str) -> Result<()> {
    if !divisor.is_effective() {
        return Err(VortexError::InvalidSpec(format!(
            "{name} must be effective (all multiplicities positive)"
        )));
    }
    Ok(())
}

fn check_scale(scale: f64, name: &str) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(VortexError::InvalidSpec(format!(
            "{name} must be positive, got {scale}"
        )));
    }
    Ok(())
}

impl ClassicalVortexSpec {
    pub fn new(
        divisor: Divisor,
        epsilon: f64,
        geometry: TorusGeometry,
        grid: GridSpec,
    ) -> Result<Self> {
        let spec = ClassicalVortexSpec {
            divisor,
            epsilon,
            geometry,
            grid,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn degree(&self) -> i64 {
        self.divisor.degree()
    }

    /// Effectiveness, `ε > 0`, and the Bradlow condition `2πdε² < Vol`.
    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        check_effective(&self.divisor, "classical divisor")?;
        let lhs = 2.0 * PI * self.degree() as f64 * self.epsilon * self.epsilon;
        let volume = self.geometry.volume();
        if lhs >= volume {
            return Err(VortexError::BradlowViolation {
                degree: self.degree(),
                epsilon: self.epsilon,
                lhs,
                volume,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedVortexSpec {
    pub divisor_plus: Divisor,
    pub divisor_minus: Divisor,
    pub tau: f64,
    pub scale_plus: f64,
    pub scale_minus: f64,
    pub epsilon: f64,
    pub geometry: TorusGeometry,
    pub grid: GridSpec,
    /// Line-bundle degree; `(d⁺ - d⁻)/2` when `None`.
    pub degree: Option<f64>,
    pub normalization: Normalization,
}

impl MixedVortexSpec {
    /// Unit scales, mean-one densities and the implied degree.
    pub fn new(
        divisor_plus: Divisor,
        divisor_minus: Divisor,
        tau: f64,
        epsilon: f64,
        geometry: TorusGeometry,
        grid: GridSpec,
    ) -> Result<Self> {
        let spec = MixedVortexSpec {
            divisor_plus,
            divisor_minus,
            tau,
            scale_plus: 1.0,
            scale_minus: 1.0,
            epsilon,
            geometry,
            grid,
            degree: None,
            normalization: Normalization::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn implied_degree(&self) -> f64 {
        (self.divisor_plus.degree() - self.divisor_minus.degree()) as f64 / 2.0
    }

    pub fn degree(&self) -> f64 {
        self.degree.unwrap_or_else(|| self.implied_degree())
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        check_effective(&self.divisor_plus, "divisor_plus")?;
        check_effective(&self.divisor_minus, "divisor_minus")?;
        check_scale(self.scale_plus, "scale_plus")?;
        check_scale(self.scale_minus, "scale_minus")?;
        if !self.tau.is_finite() {
            return Err(VortexError::InvalidSpec("tau must be finite".into()));
        }
        if let Some(d) = self.degree {
            if !d.is_finite() || (2.0 * d).fract() != 0.0 {
                return Err(VortexError::InvalidSpec(format!(
                    "degree must be a half-integer, got {d}"
                )));
            }
            if d != self.implied_degree() {
                log::warn!(
                    "mixed degree {d} differs from (d+ - d-)/2 = {}; using the given value",
                    self.implied_degree()
                );
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedTerm {
    pub divisor: Divisor,
    pub weight: i32,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedSpec {
    pub terms: Vec<GeneralizedTerm>,
    pub tau: f64,
    pub epsilon: f64,
    pub geometry: TorusGeometry,
    pub grid: GridSpec,
    /// `d̄`; the least-squares value `Σ deg(D_j) k_j / Σ k_j²` when `None`.
    pub degree: Option<f64>,
    pub normalization: Normalization,
}

impl GeneralizedSpec {
    pub fn new(
        terms: Vec<GeneralizedTerm>,
        tau: f64,
        epsilon: f64,
        geometry: TorusGeometry,
        grid: GridSpec,
    ) -> Result<Self> {
        let spec = GeneralizedSpec {
            terms,
            tau,
            epsilon,
            geometry,
            grid,
            degree: None,
            normalization: Normalization::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn implied_degree(&self) -> f64 {
        let num: f64 = self
            .terms
            .iter()
            .map(|t| t.divisor.degree() as f64 * t.weight as f64)
            .sum();
        let den: f64 = self.terms.iter().map(|t| (t.weight as f64).powi(2)).sum();
        num / den
    }

    pub fn degree(&self) -> f64 {
        self.degree.unwrap_or_else(|| self.implied_degree())
    }

    /// Term validity plus the solvability dichotomy: weights of both signs,
    /// or all weights positive with `τ < 0`.
    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if self.terms.is_empty() {
            return Err(VortexError::InvalidSpec(
                "generalized spec needs at least one term".into(),
            ));
        }
        for (j, t) in self.terms.iter().enumerate() {
            if t.weight == 0 {
                return Err(VortexError::InvalidSpec(format!(
                    "term {j}: weight must be nonzero"
                )));
            }
            check_effective(&t.divisor, &format!("term {j} divisor"))?;
            check_scale(t.scale, &format!("term {j} scale"))?;
        }
        if !self.tau.is_finite() {
            return Err(VortexError::InvalidSpec("tau must be finite".into()));
        }
        let any_pos = self.terms.iter().any(|t| t.weight > 0);
        let any_neg = self.terms.iter().any(|t| t.weight < 0);
        if !(any_pos && any_neg) {
            let ok = if any_pos {
                self.tau < 0.0
            } else {
                self.tau > 0.0
            };
            if !ok {
                return Err(VortexError::Unsolvable(format!(
                    "solvability dichotomy: weights must have mixed signs, or all be positive with tau < 0 \
                     (or all negative with tau > 0); got tau = {}",
                    self.tau
                )));
            }
        }
        Ok(())
    }
}

/// Any of the three vortex families.
#[derive(Debug, Clone, PartialEq)]
pub enum VortexSpec {
    Classical(ClassicalVortexSpec),
    Mixed(MixedVortexSpec),
    Generalized(GeneralizedSpec),
}

/// A point of the union of all divisor supports, with its multiplicity in
/// every density term (zero where the term does not vanish there).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub point: Point,
    pub multiplicities: Vec<i32>,
}

impl VortexSpec {
    pub fn epsilon(&self) -> f64 {
        match self {
            VortexSpec::Classical(s) => s.epsilon,
            VortexSpec::Mixed(s) => s.epsilon,
            VortexSpec::Generalized(s) => s.epsilon,
        }
    }

    pub fn geometry(&self) -> &TorusGeometry {
        match self {
            VortexSpec::Classical(s) => &s.geometry,
            VortexSpec::Mixed(s) => &s.geometry,
            VortexSpec::Generalized(s) => &s.geometry,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        match self {
            VortexSpec::Classical(s) => &s.grid,
            VortexSpec::Mixed(s) => &s.grid,
            VortexSpec::Generalized(s) => &s.grid,
        }
    }

    pub fn degree(&self) -> f64 {
        match self {
            VortexSpec::Classical(s) => s.degree() as f64,
            VortexSpec::Mixed(s) => s.degree(),
            VortexSpec::Generalized(s) => s.degree(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            VortexSpec::Classical(s) => s.validate(),
            VortexSpec::Mixed(s) => s.validate(),
            VortexSpec::Generalized(s) => s.validate(),
        }
    }

    /// Divisors of the density terms with their weights `k_j` (classical: one
    /// term of weight 1; mixed: weights 1 and -1).
    pub fn weighted_divisors(&self) -> Vec<(&Divisor, i32)> {
        match self {
            VortexSpec::Classical(s) => vec![(&s.divisor, 1)],
            VortexSpec::Mixed(s) => vec![(&s.divisor_plus, 1), (&s.divisor_minus, -1)],
            VortexSpec::Generalized(s) => s.terms.iter().map(|t| (&t.divisor, t.weight)).collect(),
        }
    }

    pub fn singular_points(&self) -> Vec<SingularPoint> {
        let geometry = *self.geometry();
        let divisors = self.weighted_divisors();
        let mut out: Vec<SingularPoint> = Vec::new();
        for (j, (d, _)) in divisors.iter().enumerate() {
            for (p, m) in d.iter() {
                let found = out
                    .iter()
                    .position(|s| geometry.distance(s.point, p) <= 1e-12);
                let k = found.unwrap_or_else(|| {
                    out.push(SingularPoint {
                        point: p,
                        multiplicities: vec![0; divisors.len()],
                    });
                    out.len() - 1
                });
                out[k].multiplicities[j] += m;
            }
        }
        out
    }

    /// Limiting curvature mass at a singular point as `ε → 0`: `m` for a
    /// classical vortex, `(m⁺ - m⁻)/2` for the mixed family. `None` for the
    /// generalized family, where it depends on the weights globally.
    pub fn expected_mass(&self, point: &SingularPoint) -> Option<f64> {
        match self {
            VortexSpec::Classical(_) => Some(point.multiplicities[0] as f64),
            VortexSpec::Mixed(_) => {
                Some((point.multiplicities[0] - point.multiplicities[1]) as f64 / 2.0)
            }
            VortexSpec::Generalized(_) => None,
        }
    }

    /// Order of `|φ|` at a singular point: `m` for a classical vortex at fixed
    /// `ε`, `(m⁺ + m⁻)/2` for the `ε = 0` mixed limit.
    pub fn expected_order(&self, point: &SingularPoint) -> Option<f64> {
        match self {
            VortexSpec::Classical(_) => Some(point.multiplicities[0] as f64),
            VortexSpec::Mixed(_) => {
                Some((point.multiplicities[0] + point.multiplicities[1]) as f64 / 2.0)
            }
            VortexSpec::Generalized(_) => None,
        }
    }

    /// Copy of the spec at another `ε` and grid.
    pub fn with_epsilon(&self, epsilon: f64, grid: GridSpec) -> Result<VortexSpec> {
        let out = match self {
            VortexSpec::Classical(s) => VortexSpec::Classical(ClassicalVortexSpec {
                epsilon,
                grid,
                ..s.clone()
            }),
            VortexSpec::Mixed(s) => VortexSpec::Mixed(MixedVortexSpec {
                epsilon,
                grid,
                ..s.clone()
            }),
            VortexSpec::Generalized(s) => VortexSpec::Generalized(GeneralizedSpec {
                epsilon,
                grid,
                ..s.clone()
            }),
        };
        out.validate()?;
        Ok(out)
    }
}
