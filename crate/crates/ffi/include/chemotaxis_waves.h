#ifndef CHEMOTAXIS_WAVES_H
#define CHEMOTAXIS_WAVES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum CwStatus {
  CW_STATUS_OK = 0,
  CW_STATUS_NULL_POINTER = 1,
  CW_STATUS_DOMAIN = 2,
  CW_STATUS_WINDOW_UNDEFINED = 3,
  CW_STATUS_NO_ROOT = 4,
  CW_STATUS_INADMISSIBLE = 5,
  CW_STATUS_NOT_APPLICABLE = 6,
  CW_STATUS_GRID = 7,
  CW_STATUS_SINGULAR = 8,
  CW_STATUS_BUDGET_EXCEEDED = 9,
  CW_STATUS_NO_CONVERGENCE = 10,
  CW_STATUS_DIVERGENCE = 11,
  CW_STATUS_NO_CONSTRUCTION = 12,
  CW_STATUS_FIT = 13,
  CW_STATUS_BUFFER_TOO_SMALL = 14,
  CW_STATUS_PANIC = 15,
} CwStatus;

/**
 * Opaque model parameters.
 */
typedef struct CwParams CwParams;

/**
 * Opaque traveling-wave profile.
 */
typedef struct CwWave CwWave;

/**
 * Admissible speed window for given parameters.
 */
typedef struct CwSpeedWindow {
  double mu_tau;
  double m_tau;
  double chi_star;
  double mu_star2;
  double mu_star;
  double c_star;
  /**
   * `+inf` when the window is unbounded above.
   */
  double c_star2;
  bool unbounded;
} CwSpeedWindow;

/**
 * Scalar diagnostics of a computed wave.
 */
typedef struct CwWaveSummary {
  double c;
  double mu;
  double residual_norm;
  double residual_tolerance;
  double left_state;
  double decay_ratio;
  uintptr_t outer_iterations;
  bool in_envelope;
} CwWaveSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated).
 *
 * Returns the message length in bytes excluding the terminator; when it is
 * `>= len` the message was truncated. `buf` may be NULL when `len` is 0.
 *
 * # Safety
 * `buf` must be valid for `len` bytes of writes.
 */
uintptr_t cw_last_error_message(char *buf, uintptr_t len);

/**
 * Create a parameter handle. Requires finite `a, b > 0` and `chi, tau >= 0`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CwStatus cw_params_new(double a, double b, double chi, double tau, struct CwParams **out);

/**
 * Release a parameter handle.
 *
 * # Safety
 * `params` must be NULL or a handle from [`cw_params_new`] not yet freed.
 */
void cw_params_free(struct CwParams *params);

/**
 * Infimum `m_tau` of the chemotaxis constraint; depends on `a` and `tau` only.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CwStatus cw_m_tau(double a, double tau, double *out);

/**
 * Compute the admissible window; fails with `CW_STATUS_WINDOW_UNDEFINED` when
 * chemotaxis is absent or too strong.
 *
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum CwStatus cw_admissible_window(const struct CwParams *params, struct CwSpeedWindow *out);

/**
 * Decay rate `mu` of a wave with speed `c` (the smaller root of `mu^2 - c mu + a = 0`).
 *
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum CwStatus cw_mu_from_speed(const struct CwParams *params, double c, double *out);

/**
 * Construct the wave of speed `c` on the default grid with spacing `dx`
 * (`dx <= 0` selects the library default).
 *
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum CwStatus cw_wave_solve(const struct CwParams *params,
                            double c,
                            double dx,
                            struct CwWave **out);

/**
 * Release a wave handle.
 *
 * # Safety
 * `wave` must be NULL or a handle from [`cw_wave_solve`] not yet freed.
 */
void cw_wave_free(struct CwWave *wave);

/**
 * Number of grid points of the wave (0 for NULL).
 *
 * # Safety
 * `wave` must be NULL or a live handle.
 */
uintptr_t cw_wave_len(const struct CwWave *wave);

/**
 * # Safety
 * `wave` must be a live handle and `out` valid for writes.
 */
enum CwStatus cw_wave_summary(const struct CwWave *wave, struct CwWaveSummary *out);

/**
 * Copy grid points and the `u`, `v` profiles into caller buffers of length
 * `len`. Any of the three buffers may be NULL to skip it. Fails with
 * `CW_STATUS_BUFFER_TOO_SMALL` when `len < cw_wave_len(wave)`.
 *
 * # Safety
 * `wave` must be a live handle; non-NULL buffers must hold `len` doubles.
 */
enum CwStatus cw_wave_copy(const struct CwWave *wave,
                           double *x,
                           double *u,
                           double *v,
                           uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHEMOTAXIS_WAVES_H */
