#ifndef VORTEXLAB_H
#define VORTEXLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VlStatus {
  VL_STATUS_OK = 0,
  VL_STATUS_NULL_POINTER = 1,
  VL_STATUS_INVALID_ARGUMENT = 2,
  // Vortex data breaks the Bradlow bound `2πdε² < Vol`.
  VL_STATUS_BRADLOW = 3,
  // The balance condition fails, so no solution exists.
  VL_STATUS_UNSOLVABLE = 4,
  // Newton or the linear solver stopped before reaching tolerance.
  VL_STATUS_NO_CONVERGENCE = 5,
  VL_STATUS_IO = 6,
  VL_STATUS_PANIC = 7,
} VlStatus;

// Sampled scalar field on a periodic grid, row-major with index `j * nx + i`.
typedef struct VlField VlField;

// Kazdan-Warner problem `-εΔf + Σ A_j e^{α_j f} - Σ B_j e^{-β_j f} + w = 0`
// under construction.
typedef struct VlKwProblem VlKwProblem;

// Solved vortex with its reconstructed densities.
typedef struct VlVortex VlVortex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length of the last error message on this thread, without the terminator;
// 0 when the last call succeeded.
size_t vl_last_error_length(void);

// Copies the last error message into `buf` (NUL-terminated, truncated to
// `len - 1` bytes) and returns the full message length.
//
// # Safety
// `buf` must be null or valid for `len` writes.
size_t vl_last_error_message(char *buf, size_t len);

// Static version string.
const char *vl_version(void);

// # Safety
// `field` must be null or a handle returned by this library.
void vl_field_free(struct VlField *field);

// # Safety
// `field` must be a live handle; `nx` and `ny` must be valid for writes.
enum VlStatus vl_field_shape(const struct VlField *field, size_t *nx, size_t *ny);

// Copies the samples into `out`, which must hold exactly `nx * ny` values.
//
// # Safety
// `field` must be a live handle and `out` valid for `len` writes.
enum VlStatus vl_field_copy(const struct VlField *field, double *out, size_t len);

// New problem with no exponential terms; `w` holds `nx * ny` samples.
//
// # Safety
// `w` must be valid for `nx * ny` reads and `out` for one write.
enum VlStatus vl_kw_problem_new(double lx,
                                double ly,
                                size_t nx,
                                size_t ny,
                                double epsilon,
                                const double *w,
                                struct VlKwProblem **out);

// Adds `A e^{exponent f}` (`positive != 0`) or `-B e^{-exponent f}`.
//
// # Safety
// `problem` must be a live handle and `coefficient` valid for `nx * ny` reads.
enum VlStatus vl_kw_problem_add_term(struct VlKwProblem *problem,
                                     int32_t positive,
                                     const double *coefficient,
                                     double exponent);

// # Safety
// `problem` must be null or a handle returned by this library.
void vl_kw_problem_free(struct VlKwProblem *problem);

// Solves from `f = 0` with default settings except the residual tolerance
// (pass 0 for the default). `iterations` may be null.
//
// # Safety
// `problem` must be a live handle, `out` valid for one write and
// `iterations` null or valid for one write.
enum VlStatus vl_kw_solve(const struct VlKwProblem *problem,
                          double tolerance,
                          struct VlField **out,
                          size_t *iterations);

// Classical vortex with zeros at `(xs[k], ys[k])` of multiplicity `mult[k]`.
//
// # Safety
// The point arrays must be valid for `n` reads and `out` for one write.
enum VlStatus vl_classical_solve(double lx,
                                 double ly,
                                 size_t nx,
                                 size_t ny,
                                 double epsilon,
                                 const double *xs,
                                 const double *ys,
                                 const int32_t *mult,
                                 size_t n,
                                 struct VlVortex **out);

// Mixed-sign vortex with `n_plus` zeros of the positive section and
// `n_minus` of the negative one.
//
// # Safety
// The point arrays must be valid for their counts and `out` for one write.
enum VlStatus vl_mixed_solve(double lx,
                             double ly,
                             size_t nx,
                             size_t ny,
                             double epsilon,
                             double tau,
                             const double *plus_xs,
                             const double *plus_ys,
                             const int32_t *plus_mult,
                             size_t n_plus,
                             const double *minus_xs,
                             const double *minus_ys,
                             const int32_t *minus_mult,
                             size_t n_minus,
                             struct VlVortex **out);

// # Safety
// `vortex` must be null or a handle returned by this library.
void vl_vortex_free(struct VlVortex *vortex);

// `|φ^j|²` of density term `index` (0 for classical vortices; 0 and 1 for
// the positive and negative sections of a mixed vortex).
//
// # Safety
// `vortex` must be a live handle and `out` valid for one write.
enum VlStatus vl_vortex_phi_sq(const struct VlVortex *vortex, size_t index, struct VlField **out);

// Curvature density `iΛF`.
//
// # Safety
// `vortex` must be a live handle and `out` valid for one write.
enum VlStatus vl_vortex_curvature(const struct VlVortex *vortex, struct VlField **out);

// Residuals of the integrated vortex equation and of the Chern number.
//
// # Safety
// `vortex` must be a live handle; the out pointers valid for one write.
enum VlStatus vl_vortex_identities(const struct VlVortex *vortex,
                                   double *integrated,
                                   double *chern);

// `K` and the minimizer `ξ₀` of `ξ^{-a} x + ξ^b y`.
//
// # Safety
// `k` and `xi_star` must be valid for one write.
enum VlStatus vl_young_bound(double a, double b, double x, double y, double *k, double *xi_star);

// Runs an experiment described by TOML `config`, writing artifacts to
// `out_dir` (or the directory named in the config when null). `exit_code`
// receives the command-line exit code of the run: 0, 2 or 3.
//
// # Safety
// `config` must be a NUL-terminated string, `out_dir` null or one, and
// `exit_code` valid for one write.
enum VlStatus vl_run_config(const char *config, const char *out_dir, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VORTEXLAB_H */
