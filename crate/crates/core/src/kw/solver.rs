use serde::{Deserialize, Serialize};

use super::problem::{energy_from, pointwise, residual_from, Pointwise};
use super::{Classification, KWProblem, KwError, Result};
use crate::field::{solve_linearized_best, ScalarField};

/// Floor applied to the Newton potential so the linearized operator stays
/// positive definite where all coefficients vanish.
const POTENTIAL_FLOOR: f64 = 1e-14;

/// Relative slope below which the energy can no longer resolve a descent.
const FLAT_SLOPE: f64 = 1e-12;

const MIN_STEP: f64 = 1e-12;

/// Linear residual accepted when `cg_tol` is below the round-off floor of the
/// Newton system; the line search absorbs the inexact direction.
const INEXACT_LINEAR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Target sup norm of the residual.
    pub newton_tol: f64,
    pub max_newton: usize,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    /// Relative residual for the inner linear solves.
    pub cg_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-10,
            max_newton: 60,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            cg_tol: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !(self.newton_tol > 0.0 && self.newton_tol.is_finite()) {
            return Err(KwError::InvalidConfig(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.max_newton == 0 {
            return Err(KwError::InvalidConfig(
                "max_newton must be at least 1".into(),
            ));
        }
        if !open_unit(self.armijo_c) {
            return Err(KwError::InvalidConfig(format!(
                "armijo_c must lie in (0, 1), got {}",
                self.armijo_c
            )));
        }
        if !open_unit(self.armijo_shrink) {
            return Err(KwError::InvalidConfig(format!(
                "armijo_shrink must lie in (0, 1), got {}",
                self.armijo_shrink
            )));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(KwError::InvalidConfig(format!(
                "cg_tol must lie in (0, 1), got {}",
                self.cg_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KWSolution {
    pub epsilon: f64,
    pub f: ScalarField,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub iterations: usize,
    pub energy: f64,
    /// Energy at the initial guess followed by the energy after every
    /// accepted Newton step.
    pub energy_history: Vec<f64>,
    pub classification: Classification,
}

/// Damped Newton iteration on the convex energy, starting from `init` (zero
/// when `None`). Requires `ε > 0`; see [`kw_limit`](super::kw_limit) for
/// `ε = 0`.
pub fn kw_solve(
    problem: &KWProblem,
    config: &SolverConfig,
    init: Option<&ScalarField>,
) -> Result<KWSolution> {
    config.validate()?;
    if problem.epsilon() <= 0.0 {
        return Err(KwError::InvalidProblem(
            "kw_solve needs epsilon > 0; use kw_limit at epsilon = 0".into(),
        ));
    }
    problem.check_balance()?;
    let (geometry, grid) = (*problem.geometry(), *problem.grid());
    let mut f = match init {
        Some(f0) => {
            problem.w().ensure_compatible(f0)?;
            f0.clone()
        }
        None => ScalarField::zeros(geometry, grid),
    };

    let mut pw = pointwise(problem, &f)?;
    let mut energy = energy_from(problem, &f, &pw);
    let mut residual = residual_from(problem, &f, &pw);
    let mut history = vec![energy];
    let mut iterations = 0;

    loop {
        let sup = residual.sup_abs();
        if sup <= config.newton_tol {
            break;
        }
        if iterations >= config.max_newton {
            return Err(KwError::MaxIterExceeded {
                iterations,
                residual: sup,
            });
        }
        iterations += 1;

        let potential = ScalarField::from_values(
            geometry,
            grid,
            pw.derivative
                .iter()
                .map(|v| v.max(POTENTIAL_FLOOR))
                .collect(),
        )?;
        let linear = solve_linearized_best(
            problem.epsilon(),
            &potential,
            &residual.scale(-1.0),
            config.cg_tol,
            None,
        )?;
        if !(linear.relative_residual <= config.cg_tol.max(INEXACT_LINEAR)) {
            return Err(crate::field::FieldError::NoConvergence {
                iterations: linear.iterations,
                relative_residual: linear.relative_residual,
            }
            .into());
        }
        let step = linear.solution;
        let slope = residual.inner(&step)?;
        let flat = slope.abs() <= FLAT_SLOPE * (1.0 + energy.abs());
        let slack = 1e-14 * energy.abs().max(1.0);

        let mut t = 1.0;
        let accepted: (ScalarField, Pointwise, f64) = loop {
            if t < MIN_STEP {
                return Err(KwError::LineSearchFailed {
                    iteration: iterations,
                    residual: sup,
                });
            }
            let trial = f.zip_map(&step, |a, b| a + t * b)?;
            match pointwise(problem, &trial) {
                Ok(tpw) => {
                    let e = energy_from(problem, &trial, &tpw);
                    let armijo = e <= energy + config.armijo_c * t * slope;
                    if armijo || (flat && e <= energy + slack) {
                        break (trial, tpw, e);
                    }
                }
                Err(KwError::OverflowGuard { .. }) => {}
                Err(e) => return Err(e),
            }
            t *= config.armijo_shrink;
        };
        f = accepted.0;
        pw = accepted.1;
        energy = accepted.2;
        residual = residual_from(problem, &f, &pw);
        history.push(energy);
        log::debug!(
            "newton {iterations}: step {t:.3e}, energy {energy:.12e}, sup residual {:.3e}",
            residual.sup_abs()
        );
    }

    Ok(KWSolution {
        epsilon: problem.epsilon(),
        residual_sup: residual.sup_abs(),
        residual_l2: residual.l2_norm(),
        iterations,
        energy,
        energy_history: history,
        classification: problem.classification(),
        f,
    })
}
