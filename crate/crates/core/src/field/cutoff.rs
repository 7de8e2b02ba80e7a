use super::{FieldError, GridSpec, Point, Result, ScalarField, TorusGeometry};

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Smooth step on `[0, 1]`: zero for `t <= 0`, one for `t >= 1`, and
/// `e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})` in between, which behaves like
/// `e · exp(-1/t)` as `t ↓ 0`.
pub fn cutoff_profile(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let la = -1.0 / t;
        let lb = -1.0 / (1.0 - t);
        (la - log_sum_exp(la, lb)).exp()
    }
}

/// `d/dt` of [`cutoff_profile`].
pub fn cutoff_derivative(t: f64) -> f64 {
    log_cutoff_derivative(t).map_or(0.0, f64::exp)
}

fn log_cutoff_profile(t: f64) -> f64 {
    let la = -1.0 / t;
    la - log_sum_exp(la, -1.0 / (1.0 - t))
}

fn log_cutoff_derivative(t: f64) -> Option<f64> {
    if t <= 0.0 || t >= 1.0 {
        return None;
    }
    let la = -1.0 / t;
    let lb = -1.0 / (1.0 - t);
    let weight = 1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t));
    Some(la + lb + weight.ln() - 2.0 * log_sum_exp(la, lb))
}

/// Radial cutoff: 1 within `r_inner` of `center`, 0 beyond `r_outer`, with the
/// transition variable `t = (r_outer - d) / (r_outer - r_inner)`.
pub fn bump_cutoff(
    geometry: TorusGeometry,
    grid: GridSpec,
    center: Point,
    r_inner: f64,
    r_outer: f64,
) -> Result<ScalarField> {
    let limit = 0.5 * geometry.length_x().min(geometry.length_y());
    if !(r_inner > 0.0 && r_inner < r_outer && r_outer < limit) {
        return Err(FieldError::BadRadii { r_inner, r_outer });
    }
    let width = r_outer - r_inner;
    let (hx, hy) = grid.spacing(&geometry);
    let mut values = Vec::with_capacity(grid.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let d = geometry.distance(Point::new(i as f64 * hx, j as f64 * hy), center);
            values.push(cutoff_profile((r_outer - d) / width));
        }
    }
    Ok(ScalarField::from_values_unchecked(geometry, grid, values))
}

/// `sup |∇φ|² / φ^α` for the radial cutoff with the given radii, evaluated
/// from the closed-form profile on `samples` uniformly spaced transition
/// values. Computed in log space so the vanishing edge does not underflow.
pub fn cutoff_ratio_sup(r_inner: f64, r_outer: f64, alpha: f64, samples: usize) -> Result<f64> {
    if !(r_inner > 0.0 && r_inner < r_outer) {
        return Err(FieldError::BadRadii { r_inner, r_outer });
    }
    if !(0.0..2.0).contains(&alpha) || samples < 2 {
        return Err(FieldError::InvalidArgument(format!(
            "need alpha in [0, 2) and at least two samples (alpha {alpha}, samples {samples})"
        )));
    }
    let log_width = (r_outer - r_inner).ln();
    let mut best = f64::NEG_INFINITY;
    for k in 1..samples {
        let t = k as f64 / samples as f64;
        if let Some(ld) = log_cutoff_derivative(t) {
            let v = 2.0 * ld - 2.0 * log_width - alpha * log_cutoff_profile(t);
            best = best.max(v);
        }
    }
    Ok(best.exp())
}
