use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortexlab::field::{spectral, GridSpec, Point, RegionMask, ScalarField, TorusGeometry};
use vortexlab::green::{divisor_potential, vanishing_density, Divisor};
use vortexlab::kw::{
    apriori_probe, continuation_sweep, kw_energy, kw_limit, kw_residual, kw_solve, ContinuationSchedule, ExpTerm,
    KWProblem, RefineRule, SolverConfig,
};

/// Random trigonometric polynomial with modes up to 3.
fn smooth(rng: &mut ChaCha8Rng, g: TorusGeometry, grid: GridSpec, amp: f64) -> ScalarField {
    let modes: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(0..4) as f64,
                rng.gen_range(0..4) as f64,
                rng.gen_range(-amp..amp),
                rng.gen_range(0.0..TAU),
            )
        })
        .collect();
    let (lx, ly) = (g.length_x(), g.length_y());
    ScalarField::from_fn(g, grid, |x, y| {
        modes
            .iter()
            .map(|&(kx, ky, a, ph)| a * (TAU * (kx * x / lx + ky * y / ly) + ph).cos())
            .sum()
    })
    .unwrap()
}

fn positive(rng: &mut ChaCha8Rng, g: TorusGeometry, grid: GridSpec) -> ScalarField {
    smooth(rng, g, grid, 0.3).map(f64::exp)
}

fn random_problem(seed: u64, eps: f64, grid: GridSpec) -> KWProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = TorusGeometry::new(1.0, 0.8).unwrap();
    let plus = vec![
        ExpTerm::new(positive(&mut rng, g, grid), 1.0),
        ExpTerm::new(positive(&mut rng, g, grid), 2.0),
    ];
    let minus = vec![ExpTerm::new(positive(&mut rng, g, grid), 1.5)];
    let w = smooth(&mut rng, g, grid, 0.5);
    KWProblem::new(eps, plus, minus, w).unwrap()
}

/// `A = P`, `B = Q` vanishing on grid-aligned divisors, `w ≡ 0`.
fn divisor_problem(eps: f64, grid: GridSpec) -> KWProblem {
    let g = TorusGeometry::unit();
    let dp = Divisor::new(&g, [(Point::new(0.25, 0.25), 1), (Point::new(0.75, 0.25), 1)]).unwrap();
    let dm = Divisor::point(&g, Point::new(0.5, 0.75), 1).unwrap();
    let p = vanishing_density(&divisor_potential(&dp, g, grid).unwrap().recentered(), 1.0).unwrap();
    let q = vanishing_density(&divisor_potential(&dm, g, grid).unwrap().recentered(), 1.0).unwrap();
    KWProblem::new(eps, vec![ExpTerm::new(p, 1.0)], vec![ExpTerm::new(q, 1.0)], ScalarField::zeros(g, grid)).unwrap()
}

fn manufactured(eps: f64, grid: GridSpec) -> vortexlab::kw::Result<KWProblem> {
    let g = TorusGeometry::unit();
    let exact = exact_profile(grid);
    let lap = spectral::laplacian(&exact);
    let w = exact.zip_map(&lap, |f, l| -(-eps * l + f.exp() - (-f).exp()))?;
    let one = ScalarField::constant(g, grid, 1.0);
    KWProblem::new(eps, vec![ExpTerm::new(one.clone(), 1.0)], vec![ExpTerm::new(one, 1.0)], w)
}

fn exact_profile(grid: GridSpec) -> ScalarField {
    ScalarField::from_fn(TorusGeometry::unit(), grid, |x, y| 0.3 * (TAU * x).sin() * (TAU * y).cos()).unwrap()
}

fn balance(problem: &KWProblem, f: &ScalarField) -> f64 {
    // ∫ residual, the Laplacian term integrates to zero
    kw_residual(problem, f).unwrap().integrate()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn energy_gradient_is_the_residual(seed in 0u64..10_000) {
        let grid = GridSpec::new(32, 24).unwrap();
        let problem = random_problem(seed, 0.07, grid);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let g = *problem.geometry();
        let f = smooth(&mut rng, g, grid, 0.4);
        let dir = smooth(&mut rng, g, grid, 1.0);
        let delta = 1e-6;
        let plus = f.add(&dir.scale(delta)).unwrap();
        let minus = f.sub(&dir.scale(delta)).unwrap();
        let fd = (kw_energy(&problem, &plus).unwrap() - kw_energy(&problem, &minus).unwrap()) / (2.0 * delta);
        let exact = kw_residual(&problem, &f).unwrap().inner(&dir).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{} vs {}", fd, exact);
    }

    #[test]
    fn solve_is_monotone_balanced_and_init_independent(seed in 0u64..10_000) {
        let grid = GridSpec::new(32, 32).unwrap();
        let problem = random_problem(seed, 0.05, grid);
        let cfg = SolverConfig::default();
        let cold = kw_solve(&problem, &cfg, None).unwrap();
        prop_assert!(cold.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-14 * w[0].abs().max(1.0)));
        let vol = problem.geometry().volume();
        prop_assert!(balance(&problem, &cold.f).abs() <= 1e-9 * vol);

        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        let init = ScalarField::from_values(
            *problem.geometry(),
            grid,
            (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let other = kw_solve(&problem, &cfg, Some(&init)).unwrap();
        prop_assert!(cold.f.sup_distance(&other.f).unwrap() <= 1e-8);
    }
}

#[test]
fn degenerate_coefficients_still_unique() {
    let grid = GridSpec::square(96).unwrap();
    let problem = divisor_problem(0.01, grid);
    let cfg = SolverConfig::default();
    let a = kw_solve(&problem, &cfg, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let init = ScalarField::from_values(
        *problem.geometry(),
        grid,
        (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .unwrap();
    let b = kw_solve(&problem, &cfg, Some(&init)).unwrap();
    assert!(a.f.sup_distance(&b.f).unwrap() <= 1e-8);
    assert!(balance(&problem, &a.f).abs() <= 1e-9);
}

#[test]
fn solutions_approach_the_limit_profile() {
    let grid = GridSpec::square(128).unwrap();
    let limit = kw_limit(&divisor_problem(0.0, grid)).unwrap();
    let omega = limit.mask().unwrap();
    assert_eq!(limit.excluded_count(), 3);
    let cfg = SolverConfig::default();
    let mut prev: Option<(f64, ScalarField)> = None;
    let mut gaps = Vec::new();
    for eps in [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125] {
        let problem = divisor_problem(eps, grid);
        let sol = kw_solve(&problem, &cfg, prev.as_ref().map(|(_, f)| f)).unwrap();
        let gap = sol.f.sub(&limit.f).unwrap().sup_norm(&omega).unwrap();
        if let Some((last, _)) = prev {
            assert!(gap <= 1.05 * last, "eps {eps}: {gap} after {last}");
        }
        gaps.push(gap);
        prev = Some((gap, sol.f));
    }
    assert!(gaps.last().unwrap() < &gaps[0]);
}

#[test]
fn continuation_on_manufactured_family() {
    let g = TorusGeometry::unit();
    let grid = GridSpec::square(128).unwrap();
    let schedule = ContinuationSchedule::fixed(vec![0.4, 0.2, 0.1], grid).unwrap();
    let cfg = SolverConfig::default();
    let warm = continuation_sweep(&g, manufactured, &schedule, &cfg).unwrap();
    let exact = exact_profile(grid);
    let mut warm_not_worse = 0;
    for sol in &warm {
        assert!(sol.f.sup_distance(&exact).unwrap() <= 1e-8, "eps {}", sol.epsilon);
        let cold = kw_solve(&manufactured(sol.epsilon, grid).unwrap(), &cfg, None).unwrap();
        assert!(sol.f.sup_distance(&cold.f).unwrap() <= 1e-8);
        if sol.iterations <= cold.iterations {
            warm_not_worse += 1;
        }
    }
    assert!(warm_not_worse >= 2, "warm start helped in only {warm_not_worse} stages");

    // ε-independent solutions give ε-independent probe rows
    let table = apriori_probe(&warm, &RegionMask::full(g, grid)).unwrap();
    for row in &table.rows[1..] {
        let first = &table.rows[0];
        for (a, b) in [
            (row.sup_f, first.sup_f),
            (row.sup_grad_f, first.sup_grad_f),
            (row.l2_exp_f, first.l2_exp_f),
            (row.l2_exp_neg_f, first.l2_exp_neg_f),
        ] {
            assert!((a - b).abs() <= 1e-8, "{row:?} vs {first:?}");
        }
    }
}

#[test]
fn refined_grids_resolve_each_stage() {
    let g = TorusGeometry::unit();
    let schedule = ContinuationSchedule::new(vec![0.2, 0.05, 0.02], RefineRule::default()).unwrap();
    let sols = continuation_sweep(&g, manufactured, &schedule, &SolverConfig::default()).unwrap();
    let sizes: Vec<usize> = sols.iter().map(|s| s.f.grid().nx()).collect();
    assert_eq!(sizes, vec![64, 96, 224]);
    for s in &sols {
        assert!(s.f.sup_distance(&exact_profile(*s.f.grid())).unwrap() <= 1e-8);
    }
}
