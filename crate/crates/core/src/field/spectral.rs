//! FFT-based calculus on periodic grids.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{GridSpec, Point, ScalarField, TorusGeometry};

struct Plan2d {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

type PlanCache = Mutex<HashMap<(usize, usize), Arc<Plan2d>>>;

static PLANS: LazyLock<PlanCache> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn plan(grid: &GridSpec) -> Arc<Plan2d> {
    let key = (grid.nx(), grid.ny());
    let mut plans = PLANS.lock().unwrap_or_else(|e| e.into_inner());
    plans
        .entry(key)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan2d {
                nx: key.0,
                ny: key.1,
                fwd_x: planner.plan_fft_forward(key.0),
                inv_x: planner.plan_fft_inverse(key.0),
                fwd_y: planner.plan_fft_forward(key.1),
                inv_y: planner.plan_fft_inverse(key.1),
            })
        })
        .clone()
}

impl Plan2d {
    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let (fx, fy) = if forward {
            (&self.fwd_x, &self.fwd_y)
        } else {
            (&self.inv_x, &self.inv_y)
        };
        // rows are contiguous
        fx.process(data);
        let mut column = vec![Complex64::new(0.0, 0.0); self.ny];
        for i in 0..self.nx {
            for j in 0..self.ny {
                column[j] = data[j * self.nx + i];
            }
            fy.process(&mut column);
            for j in 0..self.ny {
                data[j * self.nx + i] = column[j];
            }
        }
    }
}

/// Forward transform of the samples (unnormalized).
pub fn forward(field: &ScalarField) -> Vec<Complex64> {
    let p = plan(field.grid());
    let mut data: Vec<Complex64> = field
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    p.transform(&mut data, true);
    data
}

/// Inverse transform, normalized, keeping the real part.
pub fn inverse(
    geometry: TorusGeometry,
    grid: GridSpec,
    mut spectrum: Vec<Complex64>,
) -> ScalarField {
    let p = plan(&grid);
    p.transform(&mut spectrum, false);
    let norm = 1.0 / grid.len() as f64;
    let values = spectrum.iter().map(|c| c.re * norm).collect();
    ScalarField::from_values_unchecked(geometry, grid, values)
}

/// Signed integer frequency of index `i` on an `n`-point grid; the Nyquist
/// index `n/2` maps to `-n/2`.
pub fn frequency(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Angular wavenumbers `2πk/l` for the squared symbol (Nyquist kept).
fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    (0..n)
        .map(|i| 2.0 * PI * frequency(i, n) as f64 / l)
        .collect()
}

/// Wavenumbers for odd-order derivatives: the Nyquist mode is dropped so the
/// derivative of a real field stays real.
fn derivative_wavenumbers(n: usize, l: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == n / 2 {
                0.0
            } else {
                2.0 * PI * frequency(i, n) as f64 / l
            }
        })
        .collect()
}

/// Symbol `|k|²` of `-Δ` on this grid, laid out like the spectrum.
pub fn laplacian_symbol(geometry: &TorusGeometry, grid: &GridSpec) -> Vec<f64> {
    let kx = wavenumbers(grid.nx(), geometry.length_x());
    let ky = wavenumbers(grid.ny(), geometry.length_y());
    let mut out = Vec::with_capacity(grid.len());
    for &b in &ky {
        for &a in &kx {
            out.push(a * a + b * b);
        }
    }
    out
}

/// Analyst's Laplacian `∂²ₓ + ∂²ᵧ` by exact spectral differentiation.
pub fn laplacian(field: &ScalarField) -> ScalarField {
    let symbol = laplacian_symbol(field.geometry(), field.grid());
    let mut spec = forward(field);
    for (c, s) in spec.iter_mut().zip(&symbol) {
        *c *= -s;
    }
    inverse(*field.geometry(), *field.grid(), spec)
}

/// Spectral gradient `(∂ₓf, ∂ᵧf)`.
pub fn gradient(field: &ScalarField) -> (ScalarField, ScalarField) {
    let (g, grid) = (*field.geometry(), *field.grid());
    let kx = derivative_wavenumbers(grid.nx(), g.length_x());
    let ky = derivative_wavenumbers(grid.ny(), g.length_y());
    let spec = forward(field);
    let mut dx = spec.clone();
    let mut dy = spec;
    for (j, &kj) in ky.iter().enumerate() {
        for (i, &ki) in kx.iter().enumerate() {
            let k = j * grid.nx() + i;
            dx[k] *= Complex64::new(0.0, ki);
            dy[k] *= Complex64::new(0.0, kj);
        }
    }
    (inverse(g, grid, dx), inverse(g, grid, dy))
}

/// Pointwise `|∇f|`.
pub fn gradient_norm(field: &ScalarField) -> ScalarField {
    let (dx, dy) = gradient(field);
    dx.zip_map(&dy, |a, b| a.hypot(b))
        .expect("gradient components share a grid")
}

/// `∫ |∇f|²`, computed as `-∫ f Δf` so it matches [`laplacian`] exactly.
pub fn dirichlet_energy(field: &ScalarField) -> f64 {
    let lap = laplacian(field);
    -field.inner(&lap).expect("same grid")
}

/// Trigonometric interpolant of a field, for repeated off-grid evaluation.
///
/// Nyquist modes are evaluated as cosines, which reproduces the samples on the
/// grid and keeps the interpolant real.
pub struct FourierInterpolant {
    geometry: TorusGeometry,
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

impl FourierInterpolant {
    pub fn new(field: &ScalarField) -> Self {
        let n = field.grid().len() as f64;
        let coefficients = forward(field).into_iter().map(|c| c / n).collect();
        FourierInterpolant {
            geometry: *field.geometry(),
            grid: *field.grid(),
            coefficients,
        }
    }

    fn phases(n: usize, l: f64, t: f64) -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let theta = 2.0 * PI * frequency(i, n) as f64 * t / l;
                if i == n / 2 {
                    Complex64::new(theta.cos(), 0.0)
                } else {
                    Complex64::new(theta.cos(), theta.sin())
                }
            })
            .collect()
    }

    pub fn eval(&self, p: Point) -> f64 {
        let p = self.geometry.reduce(p);
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let ex = Self::phases(nx, self.geometry.length_x(), p.x);
        let ey = Self::phases(ny, self.geometry.length_y(), p.y);
        let mut total = 0.0;
        for (row, e_y) in self.coefficients.chunks_exact(nx).zip(&ey) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, e) in row.iter().zip(&ex) {
                acc += c * e;
            }
            total += (acc * e_y).re;
        }
        total
    }
}

/// Off-grid value by Fourier interpolation.
pub fn sample_at(field: &ScalarField, point: Point) -> f64 {
    FourierInterpolant::new(field).eval(point)
}

/// Where coefficient index `i` of an `n`-point transform lands on an
/// `m`-point transform, with its weight.
fn remap_index(i: usize, n: usize, m: usize) -> Vec<(usize, f64)> {
    if n == m {
        return vec![(i, 1.0)];
    }
    let k = frequency(i, n);
    let half = (m / 2) as i64;
    if i == n / 2 {
        // Nyquist of the source: a cosine, split symmetrically when it fits
        if m > n {
            let h = (n / 2) as i64;
            return vec![(h as usize, 0.5), ((m as i64 - h) as usize, 0.5)];
        }
        return Vec::new();
    }
    if k.abs() < half {
        vec![(k.rem_euclid(m as i64) as usize, 1.0)]
    } else if k.abs() == half {
        vec![(half as usize, 1.0)]
    } else {
        Vec::new()
    }
}

/// Spectral resampling onto another grid of the same torus (zero padding or
/// truncation of the spectrum).
pub fn resample(field: &ScalarField, grid: GridSpec) -> ScalarField {
    if *field.grid() == grid {
        return field.clone();
    }
    let (n_x, n_y) = (field.grid().nx(), field.grid().ny());
    let (m_x, m_y) = (grid.nx(), grid.ny());
    let spec = forward(field);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    let ratio = grid.len() as f64 / field.grid().len() as f64;
    let xmap: Vec<_> = (0..n_x).map(|i| remap_index(i, n_x, m_x)).collect();
    for j in 0..n_y {
        let ymap = remap_index(j, n_y, m_y);
        for (i, targets_x) in xmap.iter().enumerate() {
            let c = spec[j * n_x + i] * ratio;
            for &(jj, wy) in &ymap {
                for &(ii, wx) in targets_x {
                    out[jj * m_x + ii] += c * (wx * wy);
                }
            }
        }
    }
    inverse(*field.geometry(), grid, out)
}
