use serde::{Deserialize, Serialize};

use super::{KwError, Result};
use crate::field::{pairwise_sum, spectral, GridSpec, ScalarField, TorusGeometry};

/// Coefficient roundoff tolerated below zero before it counts as negative.
const NEGATIVE_TOLERANCE: f64 = 1e-14;

/// Largest exponent argument accepted before `exp` is taken.
pub const EXPONENT_GUARD: f64 = 700.0;

/// One term `C(x) e^{±a f}` of the nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    pub coefficient: ScalarField,
    pub exponent: f64,
}

impl ExpTerm {
    pub fn new(coefficient: ScalarField, exponent: f64) -> Self {
        ExpTerm {
            coefficient,
            exponent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    TwoSided,
    OneSidedPlus,
    OneSidedMinus,
    Vacuous,
}

/// `-ε Δf + Σ A_j e^{α_j f} - Σ B_j e^{-β_j f} + w = 0` on the torus, with
/// `Δ` the analyst's Laplacian (so `-εΔ = ε Δ_Hodge`).
#[derive(Debug, Clone, PartialEq)]
pub struct KWProblem {
    epsilon: f64,
    plus_terms: Vec<ExpTerm>,
    minus_terms: Vec<ExpTerm>,
    w: ScalarField,
}

impl KWProblem {
    pub fn new(
        epsilon: f64,
        plus_terms: Vec<ExpTerm>,
        minus_terms: Vec<ExpTerm>,
        w: ScalarField,
    ) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(KwError::InvalidProblem(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        let clamp = |terms: Vec<ExpTerm>, side: &str| -> Result<Vec<ExpTerm>> {
            terms
                .into_iter()
                .enumerate()
                .map(|(j, t)| {
                    if !(t.exponent > 0.0 && t.exponent.is_finite()) {
                        return Err(KwError::InvalidProblem(format!(
                            "{side} term {j}: exponent must be positive, got {}",
                            t.exponent
                        )));
                    }
                    t.coefficient.ensure_compatible(&w)?;
                    let min = t.coefficient.min();
                    if min < -NEGATIVE_TOLERANCE {
                        return Err(KwError::NegativeCoefficient {
                            term: j,
                            value: min,
                        });
                    }
                    Ok(ExpTerm {
                        coefficient: t.coefficient.map(|v| v.max(0.0)),
                        exponent: t.exponent,
                    })
                })
                .collect()
        };
        let plus_terms = clamp(plus_terms, "plus")?;
        let minus_terms = clamp(minus_terms, "minus")?;
        Ok(KWProblem {
            epsilon,
            plus_terms,
            minus_terms,
            w,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn plus_terms(&self) -> &[ExpTerm] {
        &self.plus_terms
    }

    pub fn minus_terms(&self) -> &[ExpTerm] {
        &self.minus_terms
    }

    pub fn w(&self) -> &ScalarField {
        &self.w
    }

    pub fn geometry(&self) -> &TorusGeometry {
        self.w.geometry()
    }

    pub fn grid(&self) -> &GridSpec {
        self.w.grid()
    }

    /// Copy of this problem with a different `ε`.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        KWProblem::new(
            epsilon,
            self.plus_terms.clone(),
            self.minus_terms.clone(),
            self.w.clone(),
        )
    }

    fn side_positive(terms: &[ExpTerm]) -> bool {
        terms.iter().any(|t| t.coefficient.max() > 0.0)
    }

    pub fn classification(&self) -> Classification {
        match (
            Self::side_positive(&self.plus_terms),
            Self::side_positive(&self.minus_terms),
        ) {
            (true, true) => Classification::TwoSided,
            (true, false) => Classification::OneSidedPlus,
            (false, true) => Classification::OneSidedMinus,
            (false, false) => Classification::Vacuous,
        }
    }

    /// Necessary condition from integrating the equation over the torus.
    pub fn check_balance(&self) -> Result<()> {
        let total = self.w.integrate();
        match self.classification() {
            Classification::TwoSided => Ok(()),
            Classification::OneSidedPlus if total < 0.0 => Ok(()),
            Classification::OneSidedPlus => Err(KwError::Unsolvable(format!(
                "only positive-exponent terms present, so ∫w must be negative (got {total:e})"
            ))),
            Classification::OneSidedMinus if total > 0.0 => Ok(()),
            Classification::OneSidedMinus => Err(KwError::Unsolvable(format!(
                "only negative-exponent terms present, so ∫w must be positive (got {total:e})"
            ))),
            Classification::Vacuous => Err(KwError::Unsolvable(
                "no exponential terms: the equation is linear and degenerate".into(),
            )),
        }
    }
}

/// Pointwise quantities of the nonlinearity at a given `f`.
pub(crate) struct Pointwise {
    /// `Σ A e^{αf} - Σ B e^{-βf}`
    pub nonlinear: Vec<f64>,
    /// `Σ αA e^{αf} + Σ βB e^{-βf}`
    pub derivative: Vec<f64>,
    /// `Σ (A/α) e^{αf} + Σ (B/β) e^{-βf}`
    pub primitive: Vec<f64>,
}

pub(crate) fn pointwise(problem: &KWProblem, f: &ScalarField) -> Result<Pointwise> {
    problem.w.ensure_compatible(f)?;
    let n = f.len();
    let fv = f.values();
    let mut out = Pointwise {
        nonlinear: vec![0.0; n],
        derivative: vec![0.0; n],
        primitive: vec![0.0; n],
    };
    for (sign, terms) in [(1.0, &problem.plus_terms), (-1.0, &problem.minus_terms)] {
        for t in terms.iter() {
            let a = t.exponent;
            let c = t.coefficient.values();
            for k in 0..n {
                let arg = sign * a * fv[k];
                if arg > EXPONENT_GUARD {
                    return Err(KwError::OverflowGuard {
                        index: k,
                        argument: arg,
                    });
                }
                let e = arg.exp();
                out.nonlinear[k] += sign * c[k] * e;
                out.derivative[k] += a * c[k] * e;
                out.primitive[k] += c[k] / a * e;
            }
        }
    }
    Ok(out)
}

/// Pointwise `-εΔf + Σ A e^{αf} - Σ B e^{-βf} + w`.
pub fn kw_residual(problem: &KWProblem, f: &ScalarField) -> Result<ScalarField> {
    let pw = pointwise(problem, f)?;
    Ok(residual_from(problem, f, &pw))
}

pub(crate) fn residual_from(problem: &KWProblem, f: &ScalarField, pw: &Pointwise) -> ScalarField {
    let lap = spectral::laplacian(f);
    let values = lap
        .values()
        .iter()
        .zip(&pw.nonlinear)
        .zip(problem.w.values())
        .map(|((l, n), w)| -problem.epsilon * l + n + w)
        .collect();
    ScalarField::from_values_unchecked(*f.geometry(), *f.grid(), values)
}

/// `E(f) = ∫ (ε/2)|∇f|² + Σ (A/α) e^{αf} + Σ (B/β) e^{-βf} + w f`, whose
/// gradient in `L²` is [`kw_residual`].
pub fn kw_energy(problem: &KWProblem, f: &ScalarField) -> Result<f64> {
    let pw = pointwise(problem, f)?;
    Ok(energy_from(problem, f, &pw))
}

pub(crate) fn energy_from(problem: &KWProblem, f: &ScalarField, pw: &Pointwise) -> f64 {
    let kinetic = if problem.epsilon > 0.0 {
        0.5 * problem.epsilon * spectral::dirichlet_energy(f)
    } else {
        0.0
    };
    let density: Vec<f64> = pw
        .primitive
        .iter()
        .zip(problem.w.values())
        .zip(f.values())
        .map(|((p, w), fv)| p + w * fv)
        .collect();
    kinetic + pairwise_sum(&density) / density.len() as f64 * f.geometry().volume()
}
