use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::diagnostics::{
    curvature_mass, default_bump_radii, identities_with, vanishing_order_fit,
    vanishing_order_fit_with,
};
use super::reduce::{densities, reconstruct_with, reduce_at, Density, Reconstruction};
use super::spec::{SingularPoint, VortexSpec};
use super::{Result, VortexError};
use crate::field::{
    bump_cutoff, spectral, FourierInterpolant, GridSpec, Point, RegionMask, ScalarField,
    TorusGeometry,
};
use crate::kw::{
    kw_limit, kw_solve, probe_row, probe_row_local, ContinuationSchedule, KWSolution, ProbeRow,
    SolverConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Radius of the discs around singular points removed to form `Ω`.
    pub omega_radius: f64,
    /// Fixed `(r_inner, r_outer)` for curvature masses; the `ε`-dependent
    /// default of [`default_bump_radii`] when absent.
    pub bump_radii: Option<(f64, f64)>,
    pub order_fit: bool,
    pub order_fit_samples: usize,
    /// Outer fit radius (capped at half the distance to the nearest point).
    pub order_fit_r_max: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            omega_radius: 0.15,
            bump_radii: None,
            order_fit: true,
            order_fit_samples: 16,
            order_fit_r_max: 0.1,
        }
    }
}

impl DiagnosticsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_radius >= 0.0 && self.omega_radius.is_finite()) {
            return Err(VortexError::InvalidSpec(format!(
                "omega_radius must be >= 0, got {}",
                self.omega_radius
            )));
        }
        if let Some((a, b)) = self.bump_radii {
            if !(a > 0.0 && a < b) {
                return Err(VortexError::InvalidSpec(format!(
                    "bump radii must satisfy 0 < inner < outer, got ({a}, {b})"
                )));
            }
        }
        if self.order_fit_samples < 2 || !(self.order_fit_r_max > 0.0) {
            return Err(VortexError::InvalidSpec(
                "order fit needs at least two samples and a positive r_max".into(),
            ));
        }
        Ok(())
    }
}

/// Measurements at one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub epsilon: f64,
    pub grid_nx: usize,
    pub grid_ny: usize,
    /// Per singular point, `∫ bump · iΛF / 2π`.
    pub curvature_masses: Vec<f64>,
    /// Mass of the complement of all bumps.
    pub complement_mass: f64,
    /// Sup over `Ω` of `|1 - |φ|²|` (classical) or `|f̃_ε - f̃_0|`.
    pub sup_deviation: f64,
    /// Residual of the integrated field equation.
    pub bradlow_residual: f64,
    /// `∫ iΛF / 2π - d`.
    pub chern_residual: f64,
    pub probe: ProbeRow,
    /// Fitted vanishing order of `|φ|` per point, at the final `ε` only.
    pub order_fits: Vec<Option<f64>>,
    pub newton_iterations: usize,
    pub residual_sup: f64,
    pub energy_monotone: bool,
    /// Wall time of the stage (solve and diagnostics).
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: String,
    pub degree: f64,
    pub points: Vec<SingularPoint>,
    pub expected_masses: Vec<Option<f64>>,
    pub expected_orders: Vec<Option<f64>>,
    pub rows: Vec<DiagnosticsReport>,
    /// Probe of the `ε = 0` limit profile on the final grid.
    pub limit_probe: Option<ProbeRow>,
    #[serde(skip)]
    pub final_solution: Option<KWSolution>,
    #[serde(skip)]
    pub final_reconstruction: Option<Reconstruction>,
}

#[derive(Debug, Clone, Error)]
#[error("sweep stage epsilon = {epsilon} failed: {source}")]
pub struct SweepError {
    pub epsilon: f64,
    #[source]
    pub source: VortexError,
    /// Rows of the stages that completed.
    pub partial: Box<SweepReport>,
}

fn kind_name(spec: &VortexSpec) -> &'static str {
    match spec {
        VortexSpec::Classical(_) => "classical",
        VortexSpec::Mixed(_) => "mixed",
        VortexSpec::Generalized(_) => "generalized",
    }
}

struct Stage {
    row: DiagnosticsReport,
    solution: KWSolution,
    reconstruction: Reconstruction,
    limit: Option<ScalarField>,
    omega: RegionMask,
}

fn energy_monotone(history: &[f64]) -> bool {
    history
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-14 * w[0].abs().max(1.0))
}

fn run_stage(
    spec: &VortexSpec,
    dens: &[Density],
    init: Option<&ScalarField>,
    solver: &SolverConfig,
    diag: &DiagnosticsConfig,
) -> Result<Stage> {
    let started = std::time::Instant::now();
    let (geometry, grid) = (*spec.geometry(), *spec.grid());
    let eps = spec.epsilon();
    let problem = reduce_at(spec, dens, eps)?;
    let init = init.map(|f| spectral::resample(f, grid));
    let solution = kw_solve(&problem, solver, init.as_ref())?;
    let rec = reconstruct_with(spec, dens, &solution.f, eps)?;

    let points = spec.singular_points();
    let locations: Vec<Point> = points.iter().map(|p| p.point).collect();
    let h = grid.max_spacing(&geometry);
    let mut masses = Vec::with_capacity(points.len());
    let mut bump_total = ScalarField::zeros(geometry, grid);
    for p in &points {
        let (ri, ro) = diag
            .bump_radii
            .unwrap_or_else(|| default_bump_radii(eps, h, &geometry, p.point, &locations));
        masses.push(curvature_mass(
            &rec.curvature_density,
            p.point,
            ri,
            ro,
            &locations,
        )?);
        bump_total = bump_total.add(&bump_cutoff(geometry, grid, p.point, ri, ro)?)?;
    }
    let complement_mass = bump_total
        .zip_map(&rec.curvature_density, |b, c| (1.0 - b) * c)?
        .integrate()
        / (2.0 * std::f64::consts::PI);

    let omega = RegionMask::excluding_discs(geometry, grid, &locations, diag.omega_radius);
    let (sup_deviation, limit) = match spec {
        VortexSpec::Classical(_) => (
            rec.phi_sq_fields[0].map(|p| 1.0 - p).sup_norm(&omega)?,
            None,
        ),
        _ => {
            let lim = kw_limit(&reduce_at(spec, dens, 0.0)?)?;
            (solution.f.sub(&lim.f)?.sup_norm(&omega)?, Some(lim.f))
        }
    };
    let ids = identities_with(spec, dens, &solution.f)?;
    let row = DiagnosticsReport {
        epsilon: eps,
        grid_nx: grid.nx(),
        grid_ny: grid.ny(),
        curvature_masses: masses,
        complement_mass,
        sup_deviation,
        bradlow_residual: ids.integrated,
        chern_residual: ids.chern,
        probe: probe_row(eps, &solution.f, &omega)?,
        order_fits: vec![None; points.len()],
        newton_iterations: solution.iterations,
        residual_sup: solution.residual_sup,
        energy_monotone: energy_monotone(&solution.energy_history),
        seconds: started.elapsed().as_secs_f64(),
    };
    Ok(Stage {
        row,
        solution,
        reconstruction: rec,
        limit,
        omega,
    })
}

fn fit_radius(center: Point, locations: &[Point], geometry: &TorusGeometry, cap: f64) -> f64 {
    let nearest = locations
        .iter()
        .map(|&q| geometry.distance(q, center))
        .filter(|&d| d > 1e-12)
        .fold(f64::INFINITY, f64::min);
    cap.min(0.5 * nearest)
        .min(0.45 * geometry.length_x().min(geometry.length_y()))
}

/// Vanishing orders of `|φ|` at the final stage. Classical vortices are fitted
/// inside the core (`r ∈ [ε/40, ε/8]`) using the analytic `e^{u_D}` and the
/// interpolated smooth part; the other families are fitted on the `ε = 0`
/// limit of the first density term over `r ∈ [3h, r_max]`.
fn order_fits(
    spec: &VortexSpec,
    dens: &[Density],
    stage: &Stage,
    diag: &DiagnosticsConfig,
) -> Result<Vec<Option<f64>>> {
    let geometry = *spec.geometry();
    let grid = *spec.grid();
    let points = spec.singular_points();
    let locations: Vec<Point> = points.iter().map(|p| p.point).collect();
    let mut out = Vec::with_capacity(points.len());
    match spec {
        VortexSpec::Classical(s) => {
            let v = FourierInterpolant::new(&stage.solution.f);
            for p in &points {
                let r_max = fit_radius(p.point, &locations, &geometry, s.epsilon / 8.0);
                let eval = |q: Point| Ok(dens[0].at(&geometry, q)? * v.eval(q).exp());
                out.push(
                    vanishing_order_fit_with(
                        eval,
                        p.point,
                        r_max / 5.0,
                        r_max,
                        diag.order_fit_samples,
                    )
                    .ok(),
                );
            }
        }
        _ => {
            let limit = stage
                .limit
                .as_ref()
                .expect("limit profile computed for non-classical families");
            let h = grid.max_spacing(&geometry);
            for p in &points {
                // first term in which this point is singular, so its density is the one that vanishes
                let j = p.multiplicities.iter().position(|&m| m != 0).unwrap_or(0);
                let phi_sq = dens[j].field.zip_map(limit, |q, f| {
                    if q == 0.0 {
                        0.0
                    } else {
                        q * (dens[j].weight as f64 * f).exp()
                    }
                })?;
                let r_max = fit_radius(p.point, &locations, &geometry, diag.order_fit_r_max);
                out.push(
                    vanishing_order_fit(&phi_sq, p.point, 3.0 * h, r_max, diag.order_fit_samples)
                        .ok(),
                );
            }
        }
    }
    Ok(out)
}

/// Continuation in `ε` along `schedule`, with the spec at each `ε` produced by
/// `family(ε, grid)`. Each stage is warm-started from the previous solution.
pub fn adiabatic_sweep<F>(
    geometry: &TorusGeometry,
    family: F,
    schedule: &ContinuationSchedule,
    solver: &SolverConfig,
    diag: &DiagnosticsConfig,
) -> std::result::Result<SweepReport, SweepError>
where
    F: Fn(f64, GridSpec) -> Result<VortexSpec>,
{
    let mut report: Option<SweepReport> = None;
    let mut last: Option<(VortexSpec, Vec<Density>, Stage)> = None;
    let empty_report = || SweepReport {
        kind: String::new(),
        degree: 0.0,
        points: Vec::new(),
        expected_masses: Vec::new(),
        expected_orders: Vec::new(),
        rows: Vec::new(),
        limit_probe: None,
        final_solution: None,
        final_reconstruction: None,
    };
    let fail = |epsilon: f64, source: VortexError, report: Option<SweepReport>| SweepError {
        epsilon,
        source,
        partial: Box::new(report.unwrap_or_else(empty_report)),
    };
    if let Err(e) = diag.validate() {
        return Err(fail(schedule.epsilons()[0], e, None));
    }

    for &eps in schedule.epsilons() {
        let attempt = || -> Result<(VortexSpec, Vec<Density>, Stage)> {
            let grid = schedule.grid_for(geometry, eps)?;
            let spec = family(eps, grid)?;
            spec.validate()?;
            let dens = densities(&spec)?;
            let init = last.as_ref().map(|(_, _, s)| &s.solution.f);
            let stage = run_stage(&spec, &dens, init, solver, diag)?;
            Ok((spec, dens, stage))
        };
        match attempt() {
            Ok((spec, dens, stage)) => {
                log::info!(
                    "sweep epsilon {eps}: masses {:?}, sup deviation {:.3e}",
                    stage.row.curvature_masses,
                    stage.row.sup_deviation
                );
                let rep = report.get_or_insert_with(|| {
                    let points = spec.singular_points();
                    SweepReport {
                        kind: kind_name(&spec).into(),
                        degree: spec.degree(),
                        expected_masses: points.iter().map(|p| spec.expected_mass(p)).collect(),
                        expected_orders: points.iter().map(|p| spec.expected_order(p)).collect(),
                        points,
                        ..empty_report()
                    }
                });
                rep.rows.push(stage.row.clone());
                last = Some((spec, dens, stage));
            }
            Err(e) => return Err(fail(eps, e, report)),
        }
    }

    let (spec, dens, stage) = last.expect("schedule is never empty");
    let mut report = report.expect("at least one stage completed");
    let finish = || -> Result<(Vec<Option<f64>>, Option<ProbeRow>)> {
        let fits = if diag.order_fit {
            order_fits(&spec, &dens, &stage, diag)?
        } else {
            vec![None; report.points.len()]
        };
        let limit_probe = match &stage.limit {
            Some(lim) => Some(probe_row_local(0.0, lim, &stage.omega)?),
            None => {
                // classical: |φ|² → 1 off the divisor, i.e. v → -u_D
                let v0 = dens[0].field.map(|p| if p > 0.0 { -(p.ln()) } else { 0.0 });
                Some(probe_row_local(0.0, &v0, &stage.omega)?)
            }
        };
        Ok((fits, limit_probe))
    };
    match finish() {
        Ok((fits, limit_probe)) => {
            if let Some(row) = report.rows.last_mut() {
                row.order_fits = fits;
            }
            report.limit_probe = limit_probe;
        }
        Err(e) => return Err(fail(spec.epsilon(), e, Some(report))),
    }
    report.final_reconstruction = Some(stage.reconstruction);
    report.final_solution = Some(stage.solution);
    Ok(report)
}
