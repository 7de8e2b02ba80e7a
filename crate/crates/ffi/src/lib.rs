//! C interface to vortexlab.
//!
//! Every function returns a [`VlStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`vl_last_error_message`]. Handles are opaque and freed with their `_free`
//! function; freeing a null handle is a no-op. Out handles are set to null
//! when a call fails.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use vortexlab::experiment::{parse_config, run};
use vortexlab::field::{FieldError, GridSpec, Point, ScalarField, TorusGeometry};
use vortexlab::green::{Divisor, GreenError};
use vortexlab::kw::{kw_solve, young_bound, ExpTerm, KWProblem, KwError, SolverConfig};
use vortexlab::vortex::{
    integral_identities, reconstruct, reduce, ClassicalVortexSpec, MixedVortexSpec, VortexError, VortexSpec,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Vortex data breaks the Bradlow bound `2πdε² < Vol`.
    Bradlow = 3,
    /// The balance condition fails, so no solution exists.
    Unsolvable = 4,
    /// Newton or the linear solver stopped before reaching tolerance.
    NoConvergence = 5,
    Io = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(VlStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(VlStatus::InvalidArgument, msg.into())
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        let status = match e {
            FieldError::NoConvergence { .. } => VlStatus::NoConvergence,
            _ => VlStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<GreenError> for Failure {
    fn from(e: GreenError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<KwError> for Failure {
    fn from(e: KwError) -> Self {
        let status = match e {
            KwError::Unsolvable(_) => VlStatus::Unsolvable,
            KwError::MaxIterExceeded { .. }
            | KwError::LineSearchFailed { .. }
            | KwError::Field(FieldError::NoConvergence { .. }) => {
                VlStatus::NoConvergence
            }
            _ => VlStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<VortexError> for Failure {
    fn from(e: VortexError) -> Self {
        match e {
            VortexError::BradlowViolation { .. } => Failure(VlStatus::Bradlow, e.to_string()),
            VortexError::Unsolvable(_) => Failure(VlStatus::Unsolvable, e.to_string()),
            VortexError::Kw(k) => k.into(),
            VortexError::Field(f) => f.into(),
            other => Failure::invalid(other.to_string()),
        }
    }
}

/// Runs `body`, converting errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> VlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_error();
            VlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            VlStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(VlStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or valid for `len` reads.
unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

fn geometry_grid(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<(TorusGeometry, GridSpec), Failure> {
    Ok((TorusGeometry::new(lx, ly)?, GridSpec::new(nx, ny)?))
}

/// # Safety
/// Each pointer must be null or valid for `n` reads.
unsafe fn divisor(
    g: &TorusGeometry,
    xs: *const f64,
    ys: *const f64,
    mult: *const i32,
    n: usize,
) -> Result<Divisor, Failure> {
    let xs = slice(xs, n, "xs")?;
    let ys = slice(ys, n, "ys")?;
    let ms = slice(mult, n, "multiplicities")?;
    let entries = (0..n).map(|k| (Point::new(xs[k], ys[k]), ms[k]));
    Ok(Divisor::new(g, entries)?)
}

/// Length of the last error message on this thread, without the terminator;
/// 0 when the last call succeeded.
#[no_mangle]
pub extern "C" fn vl_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |s| s.as_bytes().len()))
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len - 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn vl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |s| s.as_bytes());
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static version string.
#[no_mangle]
pub extern "C" fn vl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Sampled scalar field on a periodic grid, row-major with index `j * nx + i`.
pub struct VlField(ScalarField);

/// # Safety
/// `field` must be null or a handle returned by this library.
#[no_mangle]
pub unsafe extern "C" fn vl_field_free(field: *mut VlField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live handle; `nx` and `ny` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vl_field_shape(field: *const VlField, nx: *mut usize, ny: *mut usize) -> VlStatus {
    guard(|| {
        non_null(field, "field")?;
        non_null(nx, "nx")?;
        non_null(ny, "ny")?;
        let grid = (*field).0.grid();
        *nx = grid.nx();
        *ny = grid.ny();
        Ok(())
    })
}

/// Copies the samples into `out`, which must hold exactly `nx * ny` values.
///
/// # Safety
/// `field` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn vl_field_copy(field: *const VlField, out: *mut f64, len: usize) -> VlStatus {
    guard(|| {
        non_null(field, "field")?;
        non_null(out, "out")?;
        let values = (*field).0.values();
        if len != values.len() {
            return Err(Failure::invalid(format!("buffer holds {len} values, field has {}", values.len())));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, len);
        Ok(())
    })
}

/// Kazdan-Warner problem `-εΔf + Σ A_j e^{α_j f} - Σ B_j e^{-β_j f} + w = 0`
/// under construction.
pub struct VlKwProblem {
    geometry: TorusGeometry,
    grid: GridSpec,
    epsilon: f64,
    w: ScalarField,
    plus: Vec<ExpTerm>,
    minus: Vec<ExpTerm>,
}

/// New problem with no exponential terms; `w` holds `nx * ny` samples.
///
/// # Safety
/// `w` must be valid for `nx * ny` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn vl_kw_problem_new(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    epsilon: f64,
    w: *const f64,
    out: *mut *mut VlKwProblem,
) -> VlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let (geometry, grid) = geometry_grid(lx, ly, nx, ny)?;
        let w = ScalarField::from_values(geometry, grid, slice(w, grid.len(), "w")?.to_vec())?;
        let problem = VlKwProblem { geometry, grid, epsilon, w, plus: Vec::new(), minus: Vec::new() };
        *out = Box::into_raw(Box::new(problem));
        Ok(())
    })
}

/// Adds `A e^{exponent f}` (`positive != 0`) or `-B e^{-exponent f}`.
///
/// # Safety
/// `problem` must be a live handle and `coefficient` valid for `nx * ny` reads.
#[no_mangle]
pub unsafe extern "C" fn vl_kw_problem_add_term(
    problem: *mut VlKwProblem,
    positive: i32,
    coefficient: *const f64,
    exponent: f64,
) -> VlStatus {
    guard(|| {
        non_null(problem, "problem")?;
        let p = &mut *problem;
        let values = slice(coefficient, p.grid.len(), "coefficient")?.to_vec();
        let term = ExpTerm::new(ScalarField::from_values(p.geometry, p.grid, values)?, exponent);
        if positive != 0 {
            p.plus.push(term);
        } else {
            p.minus.push(term);
        }
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle returned by this library.
#[no_mangle]
pub unsafe extern "C" fn vl_kw_problem_free(problem: *mut VlKwProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves from `f = 0` with default settings except the residual tolerance
/// (pass 0 for the default). `iterations` may be null.
///
/// # Safety
/// `problem` must be a live handle, `out` valid for one write and
/// `iterations` null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn vl_kw_solve(
    problem: *const VlKwProblem,
    tolerance: f64,
    out: *mut *mut VlField,
    iterations: *mut usize,
) -> VlStatus {
    guard(|| {
        non_null(problem, "problem")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let p = &*problem;
        let kw = KWProblem::new(p.epsilon, p.plus.clone(), p.minus.clone(), p.w.clone())?;
        let mut cfg = SolverConfig::default();
        if tolerance > 0.0 {
            cfg.newton_tol = tolerance;
        }
        let sol = kw_solve(&kw, &cfg, None)?;
        if !iterations.is_null() {
            *iterations = sol.iterations;
        }
        *out = Box::into_raw(Box::new(VlField(sol.f)));
        Ok(())
    })
}

/// Solved vortex with its reconstructed densities.
pub struct VlVortex {
    phi_sq: Vec<ScalarField>,
    curvature: ScalarField,
    integrated_residual: f64,
    chern_residual: f64,
}

fn solve_vortex(spec: VortexSpec) -> Result<VlVortex, Failure> {
    let sol = kw_solve(&reduce(&spec)?, &SolverConfig::default(), None)?;
    let rec = reconstruct(&spec, &sol.f)?;
    let ids = integral_identities(&spec, &sol.f)?;
    Ok(VlVortex {
        phi_sq: rec.phi_sq_fields,
        curvature: rec.curvature_density,
        integrated_residual: ids.integrated,
        chern_residual: ids.chern,
    })
}

/// Classical vortex with zeros at `(xs[k], ys[k])` of multiplicity `mult[k]`.
///
/// # Safety
/// The point arrays must be valid for `n` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn vl_classical_solve(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    epsilon: f64,
    xs: *const f64,
    ys: *const f64,
    mult: *const i32,
    n: usize,
    out: *mut *mut VlVortex,
) -> VlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let (g, grid) = geometry_grid(lx, ly, nx, ny)?;
        let d = divisor(&g, xs, ys, mult, n)?;
        let spec = VortexSpec::Classical(ClassicalVortexSpec::new(d, epsilon, g, grid)?);
        *out = Box::into_raw(Box::new(solve_vortex(spec)?));
        Ok(())
    })
}

/// Mixed-sign vortex with `n_plus` zeros of the positive section and
/// `n_minus` of the negative one.
///
/// # Safety
/// The point arrays must be valid for their counts and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn vl_mixed_solve(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    epsilon: f64,
    tau: f64,
    plus_xs: *const f64,
    plus_ys: *const f64,
    plus_mult: *const i32,
    n_plus: usize,
    minus_xs: *const f64,
    minus_ys: *const f64,
    minus_mult: *const i32,
    n_minus: usize,
    out: *mut *mut VlVortex,
) -> VlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let (g, grid) = geometry_grid(lx, ly, nx, ny)?;
        let dp = divisor(&g, plus_xs, plus_ys, plus_mult, n_plus)?;
        let dm = divisor(&g, minus_xs, minus_ys, minus_mult, n_minus)?;
        let spec = VortexSpec::Mixed(MixedVortexSpec::new(dp, dm, tau, epsilon, g, grid)?);
        *out = Box::into_raw(Box::new(solve_vortex(spec)?));
        Ok(())
    })
}

/// # Safety
/// `vortex` must be null or a handle returned by this library.
#[no_mangle]
pub unsafe extern "C" fn vl_vortex_free(vortex: *mut VlVortex) {
    if !vortex.is_null() {
        drop(Box::from_raw(vortex));
    }
}

/// `|φ^j|²` of density term `index` (0 for classical vortices; 0 and 1 for
/// the positive and negative sections of a mixed vortex).
///
/// # Safety
/// `vortex` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn vl_vortex_phi_sq(vortex: *const VlVortex, index: usize, out: *mut *mut VlField) -> VlStatus {
    guard(|| {
        non_null(vortex, "vortex")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let v = &*vortex;
        let field = v
            .phi_sq
            .get(index)
            .ok_or_else(|| Failure::invalid(format!("term {index} out of range ({} terms)", v.phi_sq.len())))?;
        *out = Box::into_raw(Box::new(VlField(field.clone())));
        Ok(())
    })
}

/// Curvature density `iΛF`.
///
/// # Safety
/// `vortex` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn vl_vortex_curvature(vortex: *const VlVortex, out: *mut *mut VlField) -> VlStatus {
    guard(|| {
        non_null(vortex, "vortex")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        *out = Box::into_raw(Box::new(VlField((*vortex).curvature.clone())));
        Ok(())
    })
}

/// Residuals of the integrated vortex equation and of the Chern number.
///
/// # Safety
/// `vortex` must be a live handle; the out pointers valid for one write.
#[no_mangle]
pub unsafe extern "C" fn vl_vortex_identities(
    vortex: *const VlVortex,
    integrated: *mut f64,
    chern: *mut f64,
) -> VlStatus {
    guard(|| {
        non_null(vortex, "vortex")?;
        non_null(integrated, "integrated")?;
        non_null(chern, "chern")?;
        *integrated = (*vortex).integrated_residual;
        *chern = (*vortex).chern_residual;
        Ok(())
    })
}

/// `K` and the minimizer `ξ₀` of `ξ^{-a} x + ξ^b y`.
///
/// # Safety
/// `k` and `xi_star` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn vl_young_bound(a: f64, b: f64, x: f64, y: f64, k: *mut f64, xi_star: *mut f64) -> VlStatus {
    guard(|| {
        non_null(k, "k")?;
        non_null(xi_star, "xi_star")?;
        let r = young_bound(a, b, x, y).map_err(|e| Failure::invalid(e.to_string()))?;
        *k = r.k;
        *xi_star = r.xi_star;
        Ok(())
    })
}

/// Runs an experiment described by TOML `config`, writing artifacts to
/// `out_dir` (or the directory named in the config when null). `exit_code`
/// receives the command-line exit code of the run: 0, 2 or 3.
///
/// # Safety
/// `config` must be a NUL-terminated string, `out_dir` null or one, and
/// `exit_code` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn vl_run_config(config: *const c_char, out_dir: *const c_char, exit_code: *mut i32) -> VlStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(exit_code, "exit_code")?;
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|_| Failure::invalid("config is not UTF-8"))?;
        let mut cfg = match parse_config(text) {
            Ok(c) => c,
            Err(e) => {
                *exit_code = 2;
                return Err(Failure::invalid(e.to_string()));
            }
        };
        if !out_dir.is_null() {
            let dir = CStr::from_ptr(out_dir)
                .to_str()
                .map_err(|_| Failure::invalid("out_dir is not UTF-8"))?;
            cfg.output.dir = PathBuf::from(dir);
        }
        let manifest = run(&cfg).map_err(|e| Failure(VlStatus::Io, e.to_string()))?;
        *exit_code = manifest.exit_code();
        match &manifest.error {
            Some(e) => Err(Failure(
                if *exit_code == 2 { VlStatus::InvalidArgument } else { VlStatus::NoConvergence },
                e.message.clone(),
            )),
            None => Ok(()),
        }
    })
}
