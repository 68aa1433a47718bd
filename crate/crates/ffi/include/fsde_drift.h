#ifndef FSDE_DRIFT_H
#define FSDE_DRIFT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; the nonzero values match the CLI exit codes where they overlap.
typedef enum FsdeStatus {
  FSDE_STATUS_OK = 0,
  FSDE_STATUS_NULL_POINTER = 1,
  FSDE_STATUS_VALIDATION = 2,
  FSDE_STATUS_DEGENERATE = 3,
  FSDE_STATUS_IO = 4,
  FSDE_STATUS_PANIC = 5,
} FsdeStatus;

// Opaque handle to `N` paths on a uniform grid.
typedef struct FsdeBundle FsdeBundle;

typedef struct FsdeFbmParams {
  // Contraction constant in (0, 1).
  double c;
  // Truncation threshold on D_N (0 disables).
  double d;
  // Interval level; a value `<= 0` skips the interval.
  double alpha;
  // Nonzero: skip the iteration and zero the estimate outside the contraction event.
  int32_t enforce_omega;
  // Picard steps; 0 uses the default schedule.
  uint32_t max_iters;
  double tol;
} FsdeFbmParams;

// Drift catalog entry: `kind` 1 is `π − arctan x`, 2 is `−x`, 3 is
// `intercept + slope·x`. Any other kind is rejected.
typedef struct FsdeDrift {
  uint32_t kind;
  double intercept;
  double slope;
} FsdeDrift;

typedef struct FsdeFbmEstimate {
  double theta_tilde;
  double r_n;
  uint32_t iterations;
  double residual;
  double d_n;
  double i_n;
  double m_n;
  int32_t omega_holds;
  double theta_tilde_c;
  double theta_tilde_cd;
  int32_t has_aci;
  double aci_lower;
  double aci_upper;
} FsdeFbmEstimate;

typedef struct FsdeBmEstimate {
  double d_nn;
  double v_nn;
  // NaN when D_{N,n} = 0.
  double theta_hat;
  double theta_hat_d;
  int32_t has_aci;
  double aci_lower;
  double aci_upper;
} FsdeBmEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Defaults: c = 0.5, d = 0, alpha = 0.05, no enforcement, scheduled iterations, tol = 1e-12.
struct FsdeFbmParams fsde_default_fbm_params(void);

// Message of the last failure on this thread, or NULL. Valid until the next
// call into this library from the same thread.
const char *fsde_last_error_message(void);

// Wraps `n_paths × (steps + 1)` row-major `values` observed on the uniform
// grid of `[0, horizon]`.
//
// # Safety
// `values` must point to `n_paths * (steps + 1)` readable doubles and `out`
// to writable storage for one pointer.
enum FsdeStatus fsde_bundle_from_values(double horizon,
                                        size_t steps,
                                        size_t n_paths,
                                        const double *values,
                                        struct FsdeBundle **out);

// Simulates `n_paths` independent copies of `dX = θ₀ b(X) dt + σ dB^H` with
// exact fBm increments. The noise and solution bundles are returned through
// `out_noise` (may be NULL) and `out_paths`.
//
// # Safety
// `drift` must be readable; `out_paths` writable; `out_noise` writable or NULL.
enum FsdeStatus fsde_simulate(const struct FsdeDrift *drift,
                              double hurst,
                              double horizon,
                              size_t steps,
                              size_t n_paths,
                              double x0,
                              double theta0,
                              double sigma,
                              uint64_t seed,
                              struct FsdeBundle **out_noise,
                              struct FsdeBundle **out_paths);

// # Safety
// `bundle` must be NULL or a handle from this library that was not freed yet.
void fsde_bundle_free(struct FsdeBundle *bundle);

// Number of paths, 0 for NULL.
//
// # Safety
// `bundle` must be NULL or a live handle.
size_t fsde_bundle_len(const struct FsdeBundle *bundle);

// Number of grid steps ν (each path has ν + 1 values), 0 for NULL.
//
// # Safety
// `bundle` must be NULL or a live handle.
size_t fsde_bundle_steps(const struct FsdeBundle *bundle);

// Copies the row-major values into `buf`, which must hold `len · (steps + 1)` doubles.
//
// # Safety
// `bundle` must be a live handle and `buf` writable for `buf_len` doubles.
enum FsdeStatus fsde_bundle_copy_values(const struct FsdeBundle *bundle,
                                        double *buf,
                                        size_t buf_len);

// Fixed-point estimator for `H > 1/2`.
//
// # Safety
// `bundle`, `drift` and `params` must be readable (`params` may be NULL for
// defaults); `out` writable.
enum FsdeStatus fsde_estimate_fbm(const struct FsdeBundle *bundle,
                                  const struct FsdeDrift *drift,
                                  double hurst,
                                  double sigma,
                                  const struct FsdeFbmParams *params,
                                  struct FsdeFbmEstimate *out);

// Least-squares estimator for Brownian noise with constant volatility `sigma`.
// `alpha <= 0` skips the interval.
//
// # Safety
// `bundle` and `drift` must be readable and `out` writable.
enum FsdeStatus fsde_estimate_bm(const struct FsdeBundle *bundle,
                                 const struct FsdeDrift *drift,
                                 double sigma,
                                 double d,
                                 double alpha,
                                 struct FsdeBmEstimate *out);

// Threshold `𝔟/2` from a lower bound `b(x)² ≥ 𝔟`.
//
// # Safety
// `out` must be writable.
enum FsdeStatus fsde_dmax_from_lower_bound(double frak_b, double *out);

// Ornstein–Uhlenbeck threshold `(x₀²/2) e^{−2 θ_max T_max}`.
//
// # Safety
// `out` must be writable.
enum FsdeStatus fsde_dmax_ou(double x0, double theta_max, double t_max, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FSDE_DRIFT_H */
