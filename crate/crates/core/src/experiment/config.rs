use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::field::{GridSpec, Point, ScalarField, TorusGeometry};
use crate::green::Divisor;
use crate::kw::{ContinuationSchedule, ExpTerm, GridChoice, KWProblem, RefineRule, SolverConfig};
use crate::vortex::{
    ClassicalVortexSpec, DiagnosticsConfig, GeneralizedSpec, GeneralizedTerm, MixedVortexSpec,
    Normalization, VortexError, VortexSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Kw,
    Classical,
    Mixed,
    Generalized,
    Sweep,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Kw => "kw",
            ExperimentKind::Classical => "classical",
            ExperimentKind::Mixed => "mixed",
            ExperimentKind::Generalized => "generalized",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

/// Vortex family solved by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Classical,
    Mixed,
    Generalized,
}

/// `(x, y, multiplicity)`.
pub type DivisorEntry = (f64, f64, i32);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub lx: f64,
    pub ly: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { lx: 1.0, ly: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { nx: 128, ny: 128 }
    }
}

/// Grid policy of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepGrid {
    /// Per-ε grid from `refine`.
    #[default]
    Refine,
    /// `grid` at every ε.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub weight: i32,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub divisor: Vec<DivisorEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KwTermConfig {
    pub coefficient: f64,
    pub exponent: f64,
}

/// A Kazdan-Warner problem with constant coefficients. With
/// `manufactured_amplitude = a`, `w` is replaced by the value that makes
/// `a sin(2πx/lx) cos(2πy/ly)` the exact solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KwConfig {
    pub plus: Vec<KwTermConfig>,
    pub minus: Vec<KwTermConfig>,
    pub w: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manufactured_amplitude: Option<f64>,
}

impl Default for KwConfig {
    fn default() -> Self {
        let unit = KwTermConfig {
            coefficient: 1.0,
            exponent: 1.0,
        };
        KwConfig {
            plus: vec![unit],
            minus: vec![unit],
            w: 0.0,
            manufactured_amplitude: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// 16-bit PGM images of the final fields.
    pub heatmaps: bool,
    /// SVG plot of the sup deviation against ε.
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("vortexlab-out"),
            heatmaps: true,
            svg: false,
        }
    }
}

/// A complete experiment description. Every field except `kind` has a
/// default, and [`RunConfig::echo`] writes all of them out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    /// Required for `kind = "sweep"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Strictly decreasing ε values of a sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub sweep_grid: SweepGrid,
    #[serde(default)]
    pub tau: f64,
    /// Line-bundle degree; implied by the divisors when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<f64>,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub divisor: Vec<DivisorEntry>,
    #[serde(default)]
    pub divisor_plus: Vec<DivisorEntry>,
    #[serde(default)]
    pub divisor_minus: Vec<DivisorEntry>,
    #[serde(default = "one")]
    pub scale_plus: f64,
    #[serde(default = "one")]
    pub scale_minus: f64,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub refine: RefineRule,
    #[serde(default)]
    pub terms: Vec<TermConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kw: Option<KwConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}

/// Parses and validates a TOML experiment description.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config = RunConfig::from_toml(text)?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    /// Parses without validating, so overrides can be applied first.
    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_column(text, s.start))
                .unwrap_or((0, 0));
            ConfigError::Parse {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        if config.kind == ExperimentKind::Kw && config.kw.is_none() {
            config.kw = Some(KwConfig::default());
        }
        Ok(config)
    }

    /// Replaces ε (or the whole schedule of a sweep) by a single value.
    pub fn override_epsilon(&mut self, epsilon: f64) {
        if self.kind == ExperimentKind::Sweep {
            self.schedule = Some(vec![epsilon]);
        } else {
            self.epsilon = Some(epsilon);
        }
    }

    /// Uses an `n × n` grid; sweeps switch to a fixed grid.
    pub fn override_grid(&mut self, n: usize) {
        self.grid = GridConfig { nx: n, ny: n };
        if self.kind == ExperimentKind::Sweep {
            self.sweep_grid = SweepGrid::Fixed;
        }
    }
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn invalid(e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Validation(e.to_string())
}

fn divisor_from(
    geometry: &TorusGeometry,
    entries: &[DivisorEntry],
) -> Result<Divisor, VortexError> {
    Ok(Divisor::new(
        geometry,
        entries.iter().map(|&(x, y, m)| (Point::new(x, y), m)),
    )?)
}

impl RunConfig {
    /// TOML text with every default written out.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    pub fn geometry(&self) -> Result<TorusGeometry, ConfigError> {
        TorusGeometry::new(self.geometry.lx, self.geometry.ly).map_err(invalid)
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        GridSpec::new(self.grid.nx, self.grid.ny).map_err(invalid)
    }

    /// The vortex family solved, if any.
    pub fn family(&self) -> Option<Family> {
        match self.kind {
            ExperimentKind::Kw => None,
            ExperimentKind::Classical => Some(Family::Classical),
            ExperimentKind::Mixed => Some(Family::Mixed),
            ExperimentKind::Generalized => Some(Family::Generalized),
            ExperimentKind::Sweep => self.family,
        }
    }

    /// ε values to solve, largest first.
    pub fn epsilons(&self) -> Result<Vec<f64>, ConfigError> {
        match (self.kind, &self.epsilon, &self.schedule) {
            (ExperimentKind::Sweep, _, Some(s)) => Ok(s.clone()),
            (ExperimentKind::Sweep, _, None) => Err(invalid("sweep needs `schedule`")),
            (_, Some(e), None) => Ok(vec![*e]),
            (_, None, _) => Err(invalid(format!("{} run needs `epsilon`", self.kind.name()))),
            (_, Some(_), Some(_)) => Err(invalid("`schedule` is only used by sweeps")),
        }
    }

    pub fn schedule(&self) -> Result<ContinuationSchedule, ConfigError> {
        let grids = match (self.kind, self.sweep_grid) {
            (ExperimentKind::Sweep, SweepGrid::Refine) => GridChoice::Refine(
                RefineRule::new(self.refine.min_points, self.refine.multiple).map_err(invalid)?,
            ),
            _ => GridChoice::Fixed(self.grid_spec()?),
        };
        ContinuationSchedule::with_grids(self.epsilons()?, grids).map_err(invalid)
    }

    /// The vortex spec at `epsilon` on `grid`.
    pub fn spec_at(&self, epsilon: f64, grid: GridSpec) -> Result<VortexSpec, VortexError> {
        let geometry = TorusGeometry::new(self.geometry.lx, self.geometry.ly)?;
        let family = self
            .family()
            .ok_or_else(|| VortexError::InvalidSpec("experiment has no vortex family".into()))?;
        let spec = match family {
            Family::Classical => {
                if self.tau != 0.0
                    || !self.divisor_plus.is_empty()
                    || !self.divisor_minus.is_empty()
                    || !self.terms.is_empty()
                {
                    return Err(VortexError::InvalidSpec(
                        "classical runs take only `divisor` (no tau, divisor_plus/minus or terms)"
                            .into(),
                    ));
                }
                VortexSpec::Classical(ClassicalVortexSpec::new(
                    divisor_from(&geometry, &self.divisor)?,
                    epsilon,
                    geometry,
                    grid,
                )?)
            }
            Family::Mixed => {
                if !self.divisor.is_empty() || !self.terms.is_empty() {
                    return Err(VortexError::InvalidSpec(
                        "mixed runs take divisor_plus and divisor_minus".into(),
                    ));
                }
                let spec = MixedVortexSpec {
                    divisor_plus: divisor_from(&geometry, &self.divisor_plus)?,
                    divisor_minus: divisor_from(&geometry, &self.divisor_minus)?,
                    tau: self.tau,
                    scale_plus: self.scale_plus,
                    scale_minus: self.scale_minus,
                    epsilon,
                    geometry,
                    grid,
                    degree: self.degree,
                    normalization: self.normalization,
                };
                VortexSpec::Mixed(spec)
            }
            Family::Generalized => {
                if !self.divisor.is_empty()
                    || !self.divisor_plus.is_empty()
                    || !self.divisor_minus.is_empty()
                {
                    return Err(VortexError::InvalidSpec(
                        "generalized runs take their divisors from `terms`".into(),
                    ));
                }
                let terms = self
                    .terms
                    .iter()
                    .map(|t| {
                        Ok(GeneralizedTerm {
                            divisor: divisor_from(&geometry, &t.divisor)?,
                            weight: t.weight,
                            scale: t.scale,
                        })
                    })
                    .collect::<Result<Vec<_>, VortexError>>()?;
                VortexSpec::Generalized(GeneralizedSpec {
                    terms,
                    tau: self.tau,
                    epsilon,
                    geometry,
                    grid,
                    degree: self.degree,
                    normalization: self.normalization,
                })
            }
        };
        if self.family() == Some(Family::Classical) && self.degree.is_some() {
            return Err(VortexError::InvalidSpec(
                "classical degree is the divisor degree; drop `degree`".into(),
            ));
        }
        spec.validate()?;
        Ok(spec)
    }

    /// The Kazdan-Warner problem of a `kw` run, with the manufactured
    /// solution when one is requested.
    pub fn kw_problem(&self) -> Result<(KWProblem, Option<ScalarField>), ConfigError> {
        let kw = self.kw.clone().unwrap_or_default();
        let geometry = self.geometry()?;
        let grid = self.grid_spec()?;
        let epsilon = self.epsilons()?[0];
        let terms = |list: &[KwTermConfig]| -> Result<Vec<ExpTerm>, ConfigError> {
            list.iter()
                .map(|t| {
                    if !(t.coefficient >= 0.0 && t.coefficient.is_finite()) {
                        return Err(invalid(format!(
                            "kw coefficient must be >= 0, got {}",
                            t.coefficient
                        )));
                    }
                    Ok(ExpTerm::new(
                        ScalarField::constant(geometry, grid, t.coefficient),
                        t.exponent,
                    ))
                })
                .collect()
        };
        let plus = terms(&kw.plus)?;
        let minus = terms(&kw.minus)?;
        let w = ScalarField::constant(geometry, grid, kw.w);
        let problem = KWProblem::new(epsilon, plus, minus, w).map_err(invalid)?;
        match kw.manufactured_amplitude {
            None => Ok((problem, None)),
            Some(a) => {
                use std::f64::consts::TAU;
                let (lx, ly) = (geometry.length_x(), geometry.length_y());
                let exact = ScalarField::from_fn(geometry, grid, |x, y| {
                    a * (TAU * x / lx).sin() * (TAU * y / ly).cos()
                })
                .map_err(invalid)?;
                // w = -(residual of f* with w = 0)
                let zero_w = KWProblem::new(
                    epsilon,
                    problem.plus_terms().to_vec(),
                    problem.minus_terms().to_vec(),
                    ScalarField::zeros(geometry, grid),
                )
                .map_err(invalid)?;
                let w = crate::kw::kw_residual(&zero_w, &exact)
                    .map_err(invalid)?
                    .scale(-1.0);
                let problem = KWProblem::new(
                    epsilon,
                    zero_w.plus_terms().to_vec(),
                    zero_w.minus_terms().to_vec(),
                    w,
                )
                .map_err(invalid)?;
                Ok((problem, Some(exact)))
            }
        }
    }

    /// Checks every invariant that can be checked without solving.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry()?;
        self.grid_spec()?;
        self.solver.validate().map_err(invalid)?;
        self.diagnostics.validate().map_err(invalid)?;
        if self.kind == ExperimentKind::Sweep && self.family.is_none() {
            return Err(invalid(
                "sweep needs `family` (classical, mixed or generalized)",
            ));
        }
        if self.kind != ExperimentKind::Sweep && self.family.is_some() {
            return Err(invalid("`family` is only used by sweeps"));
        }
        let schedule = self.schedule()?;
        if self.kind == ExperimentKind::Kw {
            let (problem, _) = self.kw_problem()?;
            problem.check_balance().map_err(invalid)?;
            return Ok(());
        }
        if self.kw.is_some() {
            return Err(invalid("`kw` section is only used by kw runs"));
        }
        let geometry = self.geometry()?;
        for &eps in schedule.epsilons() {
            let grid = schedule.grid_for(&geometry, eps).map_err(invalid)?;
            self.spec_at(eps, grid).map_err(invalid)?;
        }
        Ok(())
    }
}
