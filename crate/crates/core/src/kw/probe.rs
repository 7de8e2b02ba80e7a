use serde::{Deserialize, Serialize};

use super::{KWSolution, KwError, Result};
use crate::field::{spectral, RegionMask, ScalarField};

/// One row of the a priori probe: sup norms of `f` and `∇f` and the `L²`
/// norms of `e^{±f}` over the masked region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub epsilon: f64,
    pub sup_f: f64,
    pub sup_grad_f: f64,
    pub l2_exp_f: f64,
    pub l2_exp_neg_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// Column-wise maximum over all rows (`epsilon` holds the smallest ε).
    pub max: ProbeRow,
}

/// Measures each solution on the region `mask`. Solutions on a different grid
/// than the mask are resampled spectrally onto it first.
pub fn apriori_probe(solutions: &[KWSolution], mask: &RegionMask) -> Result<ProbeTable> {
    let rows = solutions
        .iter()
        .map(|sol| probe_row(sol.epsilon, &sol.f, mask))
        .collect::<Result<Vec<_>>>()?;
    let fold = |pick: fn(&ProbeRow) -> f64| rows.iter().map(pick).fold(0.0, f64::max);
    let max = ProbeRow {
        epsilon: rows.iter().map(|r| r.epsilon).fold(f64::INFINITY, f64::min),
        sup_f: fold(|r| r.sup_f),
        sup_grad_f: fold(|r| r.sup_grad_f),
        l2_exp_f: fold(|r| r.l2_exp_f),
        l2_exp_neg_f: fold(|r| r.l2_exp_neg_f),
    };
    Ok(ProbeTable { rows, max })
}

/// Probe of a single profile, e.g. an `ε = 0` limit.
pub fn probe_row(epsilon: f64, f: &ScalarField, mask: &RegionMask) -> Result<ProbeRow> {
    if f.geometry() != mask.geometry() {
        return Err(KwError::InvalidProblem(
            "probe mask lives on a different torus".into(),
        ));
    }
    let f = spectral::resample(f, *mask.grid());
    let grad = spectral::gradient_norm(&f);
    Ok(ProbeRow {
        epsilon,
        sup_f: f.map(f64::abs).sup_norm(mask)?,
        sup_grad_f: grad.sup_norm(mask)?,
        l2_exp_f: f.map(f64::exp).lp_norm(2.0, mask)?,
        l2_exp_neg_f: f.map(|v| (-v).exp()).lp_norm(2.0, mask)?,
    })
}

/// [`probe_row`] with the gradient taken by fourth-order central differences
/// instead of spectrally. Meant for profiles that are singular inside the
/// excluded region (such as `ε = 0` limits), where a global spectral
/// derivative rings across the whole torus. `f` must live on the mask grid.
pub fn probe_row_local(epsilon: f64, f: &ScalarField, mask: &RegionMask) -> Result<ProbeRow> {
    if f.geometry() != mask.geometry() || f.grid() != mask.grid() {
        return Err(KwError::InvalidProblem(
            "local probe needs the profile on the mask grid".into(),
        ));
    }
    let (nx, ny) = (f.grid().nx(), f.grid().ny());
    let (hx, hy) = f.grid().spacing(f.geometry());
    let at = |i: isize, j: isize| {
        f.get(
            i.rem_euclid(nx as isize) as usize,
            j.rem_euclid(ny as isize) as usize,
        )
    };
    let d4 =
        |m2: f64, m1: f64, p1: f64, p2: f64, h: f64| (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let mut grad = vec![0.0; f.len()];
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let gx = d4(at(i - 2, j), at(i - 1, j), at(i + 1, j), at(i + 2, j), hx);
            let gy = d4(at(i, j - 2), at(i, j - 1), at(i, j + 1), at(i, j + 2), hy);
            grad[f.index(i as usize, j as usize)] = gx.hypot(gy);
        }
    }
    let grad = ScalarField::from_values(*f.geometry(), *f.grid(), grad)?;
    Ok(ProbeRow {
        epsilon,
        sup_f: f.map(f64::abs).sup_norm(mask)?,
        sup_grad_f: grad.sup_norm(mask)?,
        l2_exp_f: f.map(f64::exp).lp_norm(2.0, mask)?,
        l2_exp_neg_f: f.map(|v| (-v).exp()).lp_norm(2.0, mask)?,
    })
}
