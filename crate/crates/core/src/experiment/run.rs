use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentKind, RunConfig};
use super::output::{emit_heatmap, svg_text, write_atomic, CSV_HEADER};
use super::{OutputError, MANIFEST_FILE};
use crate::field::spectral;
use crate::kw::{kw_solve, KwError};
use crate::vortex::{adiabatic_sweep, SweepReport, VortexError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Invalid,
    SolverFailure,
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::Invalid => 2,
            RunStatus::SolverFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    /// `validation` or `solver`.
    pub category: String,
    /// Variant name, e.g. `bradlow_violation` or `max_iter_exceeded`.
    pub kind: String,
    pub epsilon: Option<f64>,
    pub message: String,
}

/// Outcome of a `kw` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwSummary {
    pub epsilon: f64,
    pub classification: String,
    pub iterations: usize,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub energy: f64,
    pub energy_history: Vec<f64>,
    /// `sup |f - f*|` for manufactured problems.
    pub sup_error: Option<f64>,
    pub sup_f: f64,
    pub sup_grad_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub status: RunStatus,
    pub config: RunConfig,
    /// TOML echo of `config`, defaults included.
    pub config_echo: String,
    pub timings: Vec<StageTiming>,
    pub sweep: Option<SweepReport>,
    pub kw: Option<KwSummary>,
    pub error: Option<ErrorRecord>,
    /// Files written next to the manifest.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

fn kw_kind(e: &KwError) -> &'static str {
    match e {
        KwError::InvalidProblem(_) => "invalid_problem",
        KwError::NegativeCoefficient { .. } => "negative_coefficient",
        KwError::OverflowGuard { .. } => "overflow_guard",
        KwError::Unsolvable(_) => "unsolvable",
        KwError::MaxIterExceeded { .. } => "max_iter_exceeded",
        KwError::LineSearchFailed { .. } => "line_search_failed",
        KwError::NoRoot { .. } => "no_root",
        KwError::InvalidConfig(_) => "invalid_config",
        KwError::NonPositiveInput => "non_positive_input",
        KwError::Field(_) => "field",
    }
}

fn vortex_kind(e: &VortexError) -> &'static str {
    match e {
        VortexError::BradlowViolation { .. } => "bradlow_violation",
        VortexError::Unsolvable(_) => "unsolvable",
        VortexError::InvalidSpec(_) => "invalid_spec",
        VortexError::OverlappingBump { .. } => "overlapping_bump",
        VortexError::DegenerateFit(_) => "degenerate_fit",
        VortexError::Green(_) => "green",
        VortexError::Kw(k) => kw_kind(k),
        VortexError::Field(_) => "field",
    }
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), OutputError> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn heatmap(
        &mut self,
        name: &str,
        field: &crate::field::ScalarField,
    ) -> Result<(), OutputError> {
        let side = emit_heatmap(field, &self.dir.join(name))?;
        self.files.push(name.to_string());
        self.files.push(
            side.file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned(),
        );
        Ok(())
    }
}

fn csv_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Runs the experiment and writes its outputs into `config.output.dir`.
/// Validation and solver failures are reported through the manifest status;
/// only I/O problems are returned as errors.
pub fn run(config: &RunConfig) -> Result<RunManifest, OutputError> {
    let dir = config.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| OutputError::new(&dir, e))?;
    let mut manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        status: RunStatus::Completed,
        config: config.clone(),
        config_echo: config.echo(),
        timings: Vec::new(),
        sweep: None,
        kw: None,
        error: None,
        files: Vec::new(),
    };
    let mut out = Writer {
        dir: &dir,
        files: Vec::new(),
    };

    let started = Instant::now();
    let validated = config.validate();
    manifest.timings.push(StageTiming {
        stage: "validate".into(),
        seconds: started.elapsed().as_secs_f64(),
    });
    if let Err(e) = validated {
        manifest.status = RunStatus::Invalid;
        manifest.error = Some(ErrorRecord {
            category: "validation".into(),
            kind: "invalid_config".into(),
            epsilon: None,
            message: e.to_string(),
        });
    } else if config.kind == ExperimentKind::Kw {
        run_kw(config, &mut manifest, &mut out)?;
    } else {
        run_vortex(config, &mut manifest, &mut out)?;
    }

    manifest.files = out.files;
    manifest.files.push(MANIFEST_FILE.to_string());
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&dir.join(MANIFEST_FILE), json.as_bytes())?;
    Ok(manifest)
}

fn run_kw(
    config: &RunConfig,
    manifest: &mut RunManifest,
    out: &mut Writer,
) -> Result<(), OutputError> {
    let started = Instant::now();
    let (problem, exact) = config
        .kw_problem()
        .expect("validated config builds its problem");
    let eps = problem.epsilon();
    match kw_solve(&problem, &config.solver, None) {
        Ok(sol) => {
            manifest.timings.push(StageTiming {
                stage: format!("solve epsilon={eps}"),
                seconds: started.elapsed().as_secs_f64(),
            });
            let sup_error = exact
                .as_ref()
                .map(|e| sol.f.sup_distance(e).expect("same grid"));
            let summary = KwSummary {
                epsilon: eps,
                classification: format!("{:?}", sol.classification),
                iterations: sol.iterations,
                residual_sup: sol.residual_sup,
                residual_l2: sol.residual_l2,
                energy: sol.energy,
                energy_history: sol.energy_history.clone(),
                sup_error,
                sup_f: sol.f.sup_abs(),
                sup_grad_f: spectral::gradient_norm(&sol.f).max(),
            };
            let row = format!(
                "{},,,{},,{},{},{},\n",
                csv_cell(Some(eps)),
                csv_cell(sup_error),
                csv_cell(Some(sol.residual_sup)),
                csv_cell(Some(summary.sup_f)),
                csv_cell(Some(summary.sup_grad_f)),
            );
            out.put("results.csv", format!("{CSV_HEADER}\n{row}").as_bytes())?;
            if config.output.heatmaps {
                out.heatmap("f.pgm", &sol.f)?;
            }
            manifest.kw = Some(summary);
        }
        Err(e) => {
            manifest.status = RunStatus::SolverFailure;
            manifest.error = Some(ErrorRecord {
                category: "solver".into(),
                kind: kw_kind(&e).into(),
                epsilon: Some(eps),
                message: e.to_string(),
            });
            out.put("results.csv", format!("{CSV_HEADER}\n").as_bytes())?;
        }
    }
    Ok(())
}

fn run_vortex(
    config: &RunConfig,
    manifest: &mut RunManifest,
    out: &mut Writer,
) -> Result<(), OutputError> {
    let geometry = config.geometry().expect("validated");
    let schedule = config.schedule().expect("validated");
    let family = |eps: f64, grid| config.spec_at(eps, grid);
    let report = match adiabatic_sweep(
        &geometry,
        family,
        &schedule,
        &config.solver,
        &config.diagnostics,
    ) {
        Ok(report) => report,
        Err(err) => {
            manifest.status = RunStatus::SolverFailure;
            manifest.error = Some(ErrorRecord {
                category: "solver".into(),
                kind: vortex_kind(&err.source).into(),
                epsilon: Some(err.epsilon),
                message: err.to_string(),
            });
            *err.partial
        }
    };
    for row in &report.rows {
        manifest.timings.push(StageTiming {
            stage: format!("solve epsilon={}", row.epsilon),
            seconds: row.seconds,
        });
    }
    out.put("results.csv", super::output::csv_text(&report).as_bytes())?;
    if config.output.svg {
        out.put("convergence.svg", svg_text(&report).as_bytes())?;
    }
    if config.output.heatmaps {
        if let (Some(sol), Some(rec)) = (&report.final_solution, &report.final_reconstruction) {
            out.heatmap("f.pgm", &sol.f)?;
            out.heatmap("curvature.pgm", &rec.curvature_density)?;
            if rec.phi_sq_fields.len() == 1 {
                out.heatmap("phi_sq.pgm", &rec.phi_sq_fields[0])?;
            } else {
                for (j, p) in rec.phi_sq_fields.iter().enumerate() {
                    out.heatmap(&format!("phi_sq_{j}.pgm"), p)?;
                }
            }
        }
    }
    manifest.sweep = Some(report);
    Ok(())
}

/// Reads `manifest.json` from a run directory.
pub fn load_manifest(dir: &Path) -> Result<RunManifest, OutputError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| OutputError::new(&path, e))?;
    serde_json::from_str(&text).map_err(|e| OutputError::new(&path, std::io::Error::other(e)))
}

/// Plain-text summary of a manifest.
pub fn summarize(manifest: &RunManifest) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "vortexlab {} | {} run | status {:?} (exit {})",
        manifest.artifact_version,
        manifest.config.kind.name(),
        manifest.status,
        manifest.exit_code()
    );
    if let Some(e) = &manifest.error {
        let at = e
            .epsilon
            .map(|x| format!(" at epsilon {x}"))
            .unwrap_or_default();
        let _ = writeln!(s, "error [{}:{}]{at}: {}", e.category, e.kind, e.message);
    }
    if let Some(k) = &manifest.kw {
        let _ = writeln!(
            s,
            "kw epsilon {} ({}): {} Newton steps, sup residual {:.3e}, energy {:.6e}",
            k.epsilon, k.classification, k.iterations, k.residual_sup, k.energy
        );
        if let Some(err) = k.sup_error {
            let _ = writeln!(s, "sup error against the manufactured solution {err:.3e}");
        }
    }
    if let Some(r) = &manifest.sweep {
        let _ = writeln!(
            s,
            "{} family, degree {}, {} singular point(s)",
            r.kind,
            r.degree,
            r.points.len()
        );
        let _ = writeln!(
            s,
            "{:>10} {:>6} {:>12} {:>12} {:>12} {:>6}  masses",
            "epsilon", "grid", "sup_dev", "integrated", "chern", "newton"
        );
        for row in &r.rows {
            let masses: Vec<String> = row
                .curvature_masses
                .iter()
                .map(|m| format!("{m:.4}"))
                .collect();
            let _ = writeln!(
                s,
                "{:>10} {:>6} {:>12.4e} {:>12.3e} {:>12.3e} {:>6}  [{}]",
                row.epsilon,
                row.grid_nx,
                row.sup_deviation,
                row.bradlow_residual,
                row.chern_residual,
                row.newton_iterations,
                masses.join(", ")
            );
        }
        if let Some(last) = r.rows.last() {
            for (k, fit) in last.order_fits.iter().enumerate() {
                if let Some(v) = fit {
                    let expected = r.expected_orders.get(k).copied().flatten();
                    let _ = writeln!(
                        s,
                        "point {k}: vanishing order {v:.4} (expected {expected:?})"
                    );
                }
            }
        }
    }
    let total: f64 = manifest.timings.iter().map(|t| t.seconds).sum();
    let _ = writeln!(s, "files: {} | {:.2} s", manifest.files.join(", "), total);
    s
}
