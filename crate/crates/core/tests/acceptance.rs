//! Acceptance suite. Prints one line per criterion and exits non-zero when a
//! criterion fails for any reason other than a documented infeasibility.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortexlab::field::{cutoff_ratio_sup, spectral, GridSpec, Point, ScalarField, TorusGeometry};
use vortexlab::green::Divisor;
use vortexlab::kw::{
    kw_solve, young_bound, ContinuationSchedule, ExpTerm, KWProblem, KWSolution, RefineRule, SolverConfig,
};
use vortexlab::vortex::{
    adiabatic_sweep, integral_identities, reconstruct, reduce, ClassicalVortexSpec, DiagnosticsConfig,
    GeneralizedSpec, GeneralizedTerm, MixedVortexSpec, SweepReport, VortexError, VortexSpec,
};

enum Verdict {
    Pass,
    Fail,
    /// Fails as stated, for a reason verified by the run itself.
    Infeasible,
}

struct Line {
    id: &'static str,
    verdict: Verdict,
    detail: String,
}

fn check(id: &'static str, ok: bool, detail: String) -> Line {
    Line {
        id,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail,
    }
}

/// Energy monotonicity of every solve and sweep stage seen so far.
#[derive(Default)]
struct Monotone {
    runs: usize,
    violations: usize,
}

impl Monotone {
    fn solve(&mut self, s: &KWSolution) {
        self.runs += 1;
        let ok = s
            .energy_history
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-14 * w[0].abs().max(1.0));
        if !ok {
            self.violations += 1;
        }
    }

    fn sweep(&mut self, r: &SweepReport) {
        for row in &r.rows {
            self.runs += 1;
            if !row.energy_monotone {
                self.violations += 1;
            }
        }
    }
}

fn manufactured(eps: f64, grid: GridSpec) -> (KWProblem, ScalarField) {
    let g = TorusGeometry::unit();
    let exact = ScalarField::from_fn(g, grid, |x, y| 0.3 * (TAU * x).sin() * (TAU * y).cos()).unwrap();
    let lap = spectral::laplacian(&exact);
    let w = exact.zip_map(&lap, |f, l| eps * l - f.exp() + (-f).exp()).unwrap();
    let one = ScalarField::constant(g, grid, 1.0);
    let p = KWProblem::new(eps, vec![ExpTerm::new(one.clone(), 1.0)], vec![ExpTerm::new(one, 1.0)], w).unwrap();
    (p, exact)
}

fn criterion_1(mono: &mut Monotone) -> Line {
    let grid = GridSpec::square(128).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [1.0, 0.1, 0.01] {
        let (problem, exact) = manufactured(eps, grid);
        let t = Instant::now();
        let sol = kw_solve(&problem, &SolverConfig::default(), None).unwrap();
        let secs = t.elapsed().as_secs_f64();
        mono.solve(&sol);
        let err = sol.f.sup_distance(&exact).unwrap();
        ok &= err <= 1e-8 && sol.residual_sup <= 1e-10 && sol.iterations <= 25 && secs < 5.0;
        parts.push(format!(
            "eps {eps}: err {err:.1e}, res {:.1e}, {} its, {secs:.2}s",
            sol.residual_sup, sol.iterations
        ));
    }
    check("1", ok, format!("manufactured recovery ({})", parts.join("; ")))
}

fn criterion_2(mono: &mut Monotone) -> Line {
    let g = TorusGeometry::unit();
    let grid = GridSpec::square(256).unwrap();
    let divisors = [
        vec![(Point::new(0.5, 0.5), 1)],
        vec![(Point::new(0.25, 0.3), 1), (Point::new(0.7, 0.65), 1)],
        vec![(Point::new(0.2, 0.75), 1), (Point::new(0.65, 0.3), 2)],
    ];
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for entries in divisors {
        let d = Divisor::new(&g, entries).unwrap();
        let degree = d.degree() as f64;
        let spec = VortexSpec::Classical(ClassicalVortexSpec::new(d, 0.2, g, grid).unwrap());
        let sol = kw_solve(&reduce(&spec).unwrap(), &SolverConfig::default(), None).unwrap();
        mono.solve(&sol);
        let phi_sq = &reconstruct(&spec, &sol.f).unwrap().phi_sq_fields[0];
        let deficit = phi_sq.map(|p| 1.0 - p).integrate();
        worst = worst.max((deficit - 2.0 * PI * degree * 0.04).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    check(
        "2",
        worst <= 1e-6 * g.volume() && secs < 30.0,
        format!("Bradlow area, d = 1, 2, 3: max |residual| {worst:.1e} in {secs:.1}s"),
    )
}

fn classical_sweep(epsilons: Vec<f64>) -> Result<SweepReport, vortexlab::vortex::SweepError> {
    let g = TorusGeometry::unit();
    let d = Divisor::new(&g, [(Point::new(0.3, 0.3), 1), (Point::new(0.71, 0.74), 2)]).unwrap();
    let schedule = ContinuationSchedule::new(epsilons, RefineRule::default()).unwrap();
    adiabatic_sweep(
        &g,
        |eps, grid| Ok(VortexSpec::Classical(ClassicalVortexSpec::new(d.clone(), eps, g, grid)?)),
        &schedule,
        &SolverConfig::default(),
        &DiagnosticsConfig::default(),
    )
}

fn concentration(report: &SweepReport) -> (bool, String) {
    let last = report.rows.last().unwrap();
    let mass_err = last
        .curvature_masses
        .iter()
        .zip([1.0, 2.0])
        .map(|(m, e)| (m - e).abs())
        .fold(0.0, f64::max);
    let decreasing = report.rows.windows(2).all(|w| w[1].sup_deviation < w[0].sup_deviation);
    let ok = mass_err <= 0.02 && decreasing && last.sup_deviation <= 0.05;
    (
        ok,
        format!(
            "masses {:?} at eps {}, deviation {:.2e} (strictly decreasing: {decreasing})",
            last.curvature_masses.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>(),
            last.epsilon,
            last.sup_deviation
        ),
    )
}

fn criterion_3_stated() -> Line {
    let t = Instant::now();
    match classical_sweep(vec![0.4, 0.2, 0.1, 0.05, 0.025]) {
        Ok(report) => {
            let (ok, detail) = concentration(&report);
            check("3", ok, format!("curvature concentration: {detail} in {:.0}s", t.elapsed().as_secs_f64()))
        }
        Err(e) => {
            let verdict = match e.source {
                VortexError::BradlowViolation { .. } if e.epsilon == 0.4 && e.partial.rows.is_empty() => {
                    Verdict::Infeasible
                }
                _ => Verdict::Fail,
            };
            Line {
                id: "3",
                verdict,
                detail: format!("curvature concentration on the stated schedule: eps {}: {}", e.epsilon, e.source),
            }
        }
    }
}

fn criterion_3_admissible(mono: &mut Monotone) -> Line {
    let t = Instant::now();
    let report = classical_sweep(vec![0.2, 0.1, 0.05, 0.025]).unwrap();
    mono.sweep(&report);
    let (ok, detail) = concentration(&report);
    let secs = t.elapsed().as_secs_f64();
    check("3a", ok && secs < 600.0, format!("same check on eps 0.2..0.025: {detail} in {secs:.0}s"))
}

fn mixed_sweep(dp: Divisor, dm: Divisor, diag: &DiagnosticsConfig) -> SweepReport {
    let g = TorusGeometry::unit();
    let schedule = ContinuationSchedule::new(vec![0.4, 0.2, 0.1, 0.05, 0.025], RefineRule::default()).unwrap();
    adiabatic_sweep(
        &g,
        |eps, grid| Ok(VortexSpec::Mixed(MixedVortexSpec::new(dp.clone(), dm.clone(), 0.0, eps, g, grid)?)),
        &schedule,
        &SolverConfig::default(),
        diag,
    )
    .unwrap()
}

struct MixedRuns {
    separated: SweepReport,
    colocated: SweepReport,
    seconds: f64,
}

fn mixed_runs(mono: &mut Monotone) -> MixedRuns {
    let g = TorusGeometry::unit();
    let t = Instant::now();
    let separated = mixed_sweep(
        Divisor::new(&g, [(Point::new(0.2, 0.2), 1), (Point::new(0.7, 0.3), 1)]).unwrap(),
        Divisor::point(&g, Point::new(0.4, 0.75), 1).unwrap(),
        &DiagnosticsConfig::default(),
    );
    // the merged core has size ε^{2/5}, so the default ε-scaled bump is too small
    let colocated = mixed_sweep(
        Divisor::point(&g, Point::new(0.3, 0.4), 2).unwrap(),
        Divisor::point(&g, Point::new(0.3, 0.4), 1).unwrap(),
        &DiagnosticsConfig { bump_radii: Some((0.2, 0.45)), ..Default::default() },
    );
    mono.sweep(&separated);
    mono.sweep(&colocated);
    MixedRuns { separated, colocated, seconds: t.elapsed().as_secs_f64() }
}

fn criterion_4(runs: &MixedRuns) -> Line {
    let rows = &runs.separated.rows;
    let last = rows.last().unwrap();
    let decreasing = rows.windows(2).all(|w| w[1].sup_deviation <= w[0].sup_deviation);
    let mass_p = last.curvature_masses[0];
    let mass_c = runs.colocated.rows.last().unwrap().curvature_masses[0];
    let ok = decreasing
        && last.sup_deviation <= 0.05
        && (mass_p - 0.5).abs() <= 0.02
        && (mass_c - 0.5).abs() <= 0.02
        && runs.seconds < 600.0;
    check(
        "4",
        ok,
        format!(
            "mixed limit: deviation {:.2e} (decreasing: {decreasing}), mass at p {mass_p:.4}, co-located mass {mass_c:.4}, {:.0}s",
            last.sup_deviation, runs.seconds
        ),
    )
}

fn criterion_5(runs: &MixedRuns) -> Line {
    let rows = &runs.separated.rows;
    let last = &rows.last().unwrap().probe;
    let limit = runs.separated.limit_probe.as_ref().unwrap();
    let max = |f: fn(&vortexlab::kw::ProbeRow) -> f64| rows.iter().map(|r| f(&r.probe)).fold(0.0, f64::max);
    let f_ratio = max(|p| p.sup_f) / last.sup_f;
    let g_ratio = max(|p| p.sup_grad_f) / last.sup_grad_f;
    let e_plus = max(|p| p.l2_exp_f) / limit.l2_exp_f;
    let e_minus = max(|p| p.l2_exp_neg_f) / limit.l2_exp_neg_f;
    check(
        "5",
        f_ratio <= 1.5 && g_ratio <= 1.5 && e_plus <= 2.0 && e_minus <= 2.0,
        format!(
            "interior bounds: sup f ratio {f_ratio:.3}, sup grad ratio {g_ratio:.3}, L2 e^f / limit {e_plus:.3}, L2 e^-f / limit {e_minus:.3}"
        ),
    )
}

fn criterion_6(runs: &MixedRuns) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for report in [&runs.separated, &runs.colocated] {
        let fits = &report.rows.last().unwrap().order_fits;
        for (k, point) in report.points.iter().enumerate() {
            let (mp, mm) = (point.multiplicities[0], point.multiplicities[1]);
            let expected = (mp + mm) as f64 / 2.0;
            let lower = (mp - mm).abs() as f64 / 2.0;
            let Some(fit) = fits[k] else {
                ok = false;
                parts.push(format!("({mp},{mm}): no fit"));
                continue;
            };
            let close = (fit - expected).abs() <= 0.05 * expected;
            // the lower bound is attained when one side is empty, so it is
            // checked at the fit's own 5% resolution
            let above = if mp != 0 && mm != 0 { fit > lower } else { fit >= 0.95 * lower };
            ok &= close && above;
            parts.push(format!("({mp},{mm}): {fit:.4} vs {expected}"));
        }
    }
    check("6", ok, format!("vanishing orders {}", parts.join(", ")))
}

fn criterion_7(mono: &mut Monotone) -> Line {
    let g = TorusGeometry::unit();
    let grid = GridSpec::square(128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let mut term = |weight: i32| {
            let m = rng.gen_range(1..=2);
            let p = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            GeneralizedTerm { divisor: Divisor::point(&g, p, m).unwrap(), weight, scale: 1.0 }
        };
        let terms = vec![term(2), term(1), term(-1)];
        let tau = rng.gen_range(-0.5..0.5);
        for eps in [0.2, 0.1] {
            let spec = VortexSpec::Generalized(GeneralizedSpec::new(terms.clone(), tau, eps, g, grid).unwrap());
            let sol = kw_solve(&reduce(&spec).unwrap(), &SolverConfig::default(), None).unwrap();
            mono.solve(&sol);
            worst = worst.max(integral_identities(&spec, &sol.f).unwrap().integrated.abs());
        }
    }
    check(
        "7",
        worst <= 1e-6 * g.volume(),
        format!("integral identity, k = (2, 1, -1): max |residual| {worst:.1e}"),
    )
}

fn criterion_8(mono: &mut Monotone) -> Line {
    let g = TorusGeometry::unit();
    let dp = Divisor::new(&g, [(Point::new(0.2, 0.2), 1), (Point::new(0.7, 0.3), 1)]).unwrap();
    let dm = Divisor::point(&g, Point::new(0.4, 0.75), 1).unwrap();
    let rule = RefineRule::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for eps in [0.4, 0.2, 0.1, 0.05] {
        let grid = rule.grid_for(&g, eps).unwrap();
        let spec = VortexSpec::Mixed(MixedVortexSpec::new(dp.clone(), dm.clone(), 0.0, eps, g, grid).unwrap());
        let problem = reduce(&spec).unwrap();
        let init =
            ScalarField::from_values(g, grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let a = kw_solve(&problem, &SolverConfig::default(), None).unwrap();
        let b = kw_solve(&problem, &SolverConfig::default(), Some(&init)).unwrap();
        mono.solve(&a);
        mono.solve(&b);
        worst = worst.max(a.f.sup_distance(&b.f).unwrap());
    }
    check(
        "8",
        worst <= 1e-8 && mono.violations == 0,
        format!(
            "uniqueness: max init gap {worst:.1e}; energy monotone in {}/{} runs",
            mono.runs - mono.violations,
            mono.runs
        ),
    )
}

fn criterion_9() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n_xi = 100;
    let step = (1e4f64).ln() / (n_xi - 1) as f64;
    let mut worst_violation: f64 = 0.0;
    let mut misplaced = 0;
    for _ in 0..10_000 {
        let [a, b, x, y] = [0; 4].map(|_| rng.gen_range(0.1..10.0));
        let bound = young_bound(a, b, x, y).unwrap();
        let lhs = |xi: f64| xi.powf(-a) * x + xi.powf(b) * y;
        // log-spaced ξ over four decades, offset so ξ₀ is generally off-grid
        let offset: f64 = rng.gen_range(0.0..1.0);
        let (mut best, mut best_t) = (f64::INFINITY, 0.0);
        for k in 0..n_xi {
            let t = step * (k as f64 - (n_xi - 1) as f64 / 2.0 + offset - 0.5);
            let v = lhs(bound.xi_star * t.exp());
            worst_violation = worst_violation.max((bound.minimum - v) / bound.minimum);
            if v < best {
                (best, best_t) = (v, t);
            }
        }
        if best_t.abs() > step {
            misplaced += 1;
        }
    }
    check(
        "9",
        worst_violation <= 1e-12 && misplaced == 0,
        format!("scalar inequality: worst relative violation {worst_violation:.1e}, argmin off xi0 in {misplaced} cases"),
    )
}

fn criterion_10() -> Line {
    let alphas = [1.5, 1.75, 1.9];
    let sups: Vec<f64> = alphas.iter().map(|&a| cutoff_ratio_sup(0.1, 0.3, a, 200_000).unwrap()).collect();
    let mut ok = true;
    let mut ratios = Vec::new();
    for k in 1..alphas.len() {
        let measured = sups[k] / sups[k - 1];
        let allowed = ((2.0 - alphas[k - 1]) / (2.0 - alphas[k])).powi(4);
        ok &= measured <= 1.05 * allowed;
        ratios.push(format!("{measured:.3} <= 1.05 x {allowed:.3}"));
    }
    check("10", ok, format!("cutoff scaling: {}", ratios.join(", ")))
}

fn main() -> ExitCode {
    let mut mono = Monotone::default();
    let mut lines = vec![criterion_1(&mut mono), criterion_2(&mut mono), criterion_3_stated()];
    lines.push(criterion_3_admissible(&mut mono));
    let runs = mixed_runs(&mut mono);
    lines.push(criterion_4(&runs));
    lines.push(criterion_5(&runs));
    lines.push(criterion_6(&runs));
    lines.push(criterion_7(&mut mono));
    lines.push(criterion_8(&mut mono));
    lines.push(criterion_9());
    lines.push(criterion_10());

    let mut failed = false;
    for line in &lines {
        let tag = match line.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed = true;
                "FAIL"
            }
            Verdict::Infeasible => "FAIL (infeasible as stated)",
        };
        println!("criterion {:>3}: {tag}: {}", line.id, line.detail);
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
