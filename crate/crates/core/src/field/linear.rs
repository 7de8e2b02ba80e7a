use num_complex::Complex64;

use super::spectral::{forward, inverse, laplacian_symbol};
use super::{FieldError, Result, ScalarField};

/// Outcome of a preconditioned conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct LinearSolve {
    pub solution: ScalarField,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `(-ε Δ + V) x = rhs` to relative residual `tol`.
pub fn solve_linearized(
    epsilon: f64,
    potential: &ScalarField,
    rhs: &ScalarField,
    tol: f64,
) -> Result<ScalarField> {
    solve_linearized_with(epsilon, potential, rhs, tol, None).map(|s| s.solution)
}

/// Like [`solve_linearized`], with an explicit iteration cap (default
/// `10 * (nx + ny)`) and iteration statistics.
pub fn solve_linearized_with(
    epsilon: f64,
    potential: &ScalarField,
    rhs: &ScalarField,
    tol: f64,
    max_iter: Option<usize>,
) -> Result<LinearSolve> {
    let solve = solve_linearized_best(epsilon, potential, rhs, tol, max_iter)?;
    if solve.relative_residual > tol {
        return Err(FieldError::NoConvergence {
            iterations: solve.iterations,
            relative_residual: solve.relative_residual,
        });
    }
    Ok(solve)
}

/// [`solve_linearized_with`] that returns the last iterate even when `tol`
/// was not reached (for instance at the round-off floor of a badly scaled
/// potential); check `relative_residual`.
pub fn solve_linearized_best(
    epsilon: f64,
    potential: &ScalarField,
    rhs: &ScalarField,
    tol: f64,
    max_iter: Option<usize>,
) -> Result<LinearSolve> {
    potential.ensure_compatible(rhs)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(FieldError::InvalidArgument(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    if !(tol > 0.0) {
        return Err(FieldError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let vmin = potential.min();
    if !(vmin > 0.0) {
        return Err(FieldError::NonPositivePotential(vmin));
    }
    let grid = *rhs.grid();
    let geometry = *rhs.geometry();
    let cap = max_iter.unwrap_or(10 * (grid.nx() + grid.ny()));

    let symbol = laplacian_symbol(&geometry, &grid);
    let vbar = potential.mean();
    let precond: Vec<f64> = symbol.iter().map(|s| 1.0 / (epsilon * s + vbar)).collect();
    let v = potential.values();

    let apply = |x: &[f64]| -> Vec<f64> {
        let field = ScalarField::from_values_unchecked(geometry, grid, x.to_vec());
        let mut spec = forward(&field);
        for (c, s) in spec.iter_mut().zip(&symbol) {
            *c *= epsilon * s;
        }
        let lap = inverse(geometry, grid, spec);
        lap.values()
            .iter()
            .zip(x)
            .zip(v)
            .map(|((l, xi), vi)| l + vi * xi)
            .collect()
    };
    let precondition = |r: &[f64]| -> Vec<f64> {
        let field = ScalarField::from_values_unchecked(geometry, grid, r.to_vec());
        let mut spec: Vec<Complex64> = forward(&field);
        for (c, p) in spec.iter_mut().zip(&precond) {
            *c *= *p;
        }
        inverse(geometry, grid, spec).into_values()
    };

    let b = rhs.values();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(LinearSolve {
            solution: ScalarField::zeros(geometry, grid),
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let n = b.len();
    let mut x = vec![0.0; n];
    let mut iterations = 0;
    // One restart from the true residual guards against drift of the
    // recursively updated residual at tight tolerances.
    for _attempt in 0..3 {
        let ax = apply(&x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        if norm(&r) <= tol * bnorm {
            break;
        }
        let mut z = precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while iterations < cap {
            iterations += 1;
            let ap = apply(&p);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            if norm(&r) <= 0.5 * tol * bnorm {
                break;
            }
            z = precondition(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        if iterations >= cap {
            break;
        }
    }

    let ax = apply(&x);
    let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let relative_residual = norm(&res) / bnorm;
    Ok(LinearSolve {
        solution: ScalarField::from_values_unchecked(geometry, grid, x),
        iterations,
        relative_residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    super::pairwise_sum(&prod)
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
