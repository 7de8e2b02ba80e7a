use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{kw_solve, KWProblem, KWSolution, KwError, Result, SolverConfig};
use crate::field::{spectral, GridSpec, TorusGeometry};

/// Grid chosen for each `ε`: per axis, the smallest multiple of `multiple`
/// that is at least `min_points` and gives spacing `h <= ε / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineRule {
    pub min_points: usize,
    pub multiple: usize,
}

impl Default for RefineRule {
    fn default() -> Self {
        RefineRule {
            min_points: 64,
            multiple: 32,
        }
    }
}

impl RefineRule {
    pub fn new(min_points: usize, multiple: usize) -> Result<Self> {
        if multiple == 0 || !multiple.is_multiple_of(2) || min_points < 8 {
            return Err(KwError::InvalidConfig(format!(
                "refine rule needs an even multiple and at least 8 points (got {multiple}, {min_points})"
            )));
        }
        Ok(RefineRule {
            min_points,
            multiple,
        })
    }

    fn axis(&self, length: f64, epsilon: f64) -> usize {
        let needed = (4.0 * length / epsilon).ceil().max(self.min_points as f64) as usize;
        needed.div_ceil(self.multiple) * self.multiple
    }

    pub fn grid_for(&self, geometry: &TorusGeometry, epsilon: f64) -> Result<GridSpec> {
        let nx = self.axis(geometry.length_x(), epsilon);
        let ny = self.axis(geometry.length_y(), epsilon);
        Ok(GridSpec::new(nx, ny)?)
    }
}

/// How each stage picks its grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridChoice {
    Refine(RefineRule),
    /// Same grid at every `ε`; the resolution rule is not enforced.
    Fixed(GridSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSchedule {
    epsilons: Vec<f64>,
    grids: GridChoice,
}

impl ContinuationSchedule {
    pub fn new(epsilons: Vec<f64>, refine_rule: RefineRule) -> Result<Self> {
        Self::with_grids(epsilons, GridChoice::Refine(refine_rule))
    }

    pub fn fixed(epsilons: Vec<f64>, grid: GridSpec) -> Result<Self> {
        Self::with_grids(epsilons, GridChoice::Fixed(grid))
    }

    pub fn with_grids(epsilons: Vec<f64>, grids: GridChoice) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(KwError::InvalidConfig(
                "schedule has no epsilon values".into(),
            ));
        }
        if epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(KwError::InvalidConfig(
                "schedule epsilons must be positive".into(),
            ));
        }
        if epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(KwError::InvalidConfig(
                "schedule epsilons must be strictly decreasing".into(),
            ));
        }
        Ok(ContinuationSchedule { epsilons, grids })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn grids(&self) -> &GridChoice {
        &self.grids
    }

    pub fn grid_for(&self, geometry: &TorusGeometry, epsilon: f64) -> Result<GridSpec> {
        match &self.grids {
            GridChoice::Refine(rule) => rule.grid_for(geometry, epsilon),
            GridChoice::Fixed(grid) => Ok(*grid),
        }
    }
}

/// A sweep stage failed; the solutions of earlier stages are kept.
#[derive(Debug, Clone, Error)]
#[error("continuation stage epsilon = {epsilon} failed: {source}")]
pub struct SweepFailure {
    pub epsilon: f64,
    #[source]
    pub source: KwError,
    pub completed: Vec<KWSolution>,
}

/// Solves the family `template(ε, grid)` along the schedule, warm-starting
/// each stage from the previous solution resampled to the new grid.
pub fn continuation_sweep<F>(
    geometry: &TorusGeometry,
    template: F,
    schedule: &ContinuationSchedule,
    config: &SolverConfig,
) -> std::result::Result<Vec<KWSolution>, SweepFailure>
where
    F: Fn(f64, GridSpec) -> Result<KWProblem>,
{
    let mut done: Vec<KWSolution> = Vec::with_capacity(schedule.epsilons.len());
    for &eps in &schedule.epsilons {
        let stage = || -> Result<KWSolution> {
            let grid = schedule.grid_for(geometry, eps)?;
            let problem = template(eps, grid)?;
            let init = done
                .last()
                .map(|prev| spectral::resample(&prev.f, *problem.grid()));
            kw_solve(&problem, config, init.as_ref())
        };
        match stage() {
            Ok(sol) => {
                log::info!(
                    "epsilon {eps}: {} Newton steps, sup residual {:.2e}",
                    sol.iterations,
                    sol.residual_sup
                );
                done.push(sol);
            }
            Err(source) => {
                return Err(SweepFailure {
                    epsilon: eps,
                    source,
                    completed: done,
                })
            }
        }
    }
    Ok(done)
}
