#ifndef LOSSY_WITNESS_H
#define LOSSY_WITNESS_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum LwError {
  LW_ERROR_OK = 0,
  LW_ERROR_NULL_POINTER = 1,
  LW_ERROR_INVALID_INPUT = 2,
  LW_ERROR_SOLVE_FAILED = 3,
  LW_ERROR_NO_SIGN_CHANGE = 4,
  LW_ERROR_NON_MONOTONE = 5,
  LW_ERROR_INTERNAL = 6,
} LwError;

// Post-processing applied to no-click events.
typedef enum LwStrategy {
  LW_STRATEGY_DISCARD = 0,
  LW_STRATEGY_ASSIGNMENT = 1,
} LwStrategy;

typedef enum LwSolveStatus {
  LW_SOLVE_STATUS_OPTIMAL = 0,
  LW_SOLVE_STATUS_INFEASIBLE = 1,
  LW_SOLVE_STATUS_NUMERICAL_FAILURE = 2,
} LwSolveStatus;

// Opaque solver report.
typedef struct LwReport LwReport;

// Opaque witness operator.
typedef struct LwWitness LwWitness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len` bytes) and returns the full message length, or 0 when
// the last call succeeded.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t lw_last_error_message(char *buf, size_t len);

// `W_θ = cos²θ·1 − |Ψ_θ⟩⟨Ψ_θ|` for `θ ∈ (0, π/4]`.
//
// # Safety
// `out` must be null or valid for writes.
enum LwError lw_witness_theta(double theta, struct LwWitness **out);

// Witness from its 16 Pauli coefficients `w[4i + j]` of `σ_i ⊗ σ_j`.
//
// # Safety
// `coeffs` must point to 16 doubles; `out` must be valid for writes.
enum LwError lw_witness_from_coeffs(const double *coeffs, struct LwWitness **out);

// # Safety
// `w` must be null or a handle from this library not yet freed.
void lw_witness_free(struct LwWitness *w);

// Solves the worst-case program. `a`, `b` point to three doubles each and
// are read only for [`LwStrategy::Assignment`]; null means `(0, 0, 0)`.
// A report is produced for every status; check [`lw_report_status`].
//
// # Safety
// `w` must be a live handle, `a`/`b` null or valid for 3 reads, `out` valid
// for writes.
enum LwError lw_solve(const struct LwWitness *w,
                      enum LwStrategy kind,
                      const double *a,
                      const double *b,
                      double eta,
                      struct LwReport **out);

// # Safety
// `r` must be a live report handle.
enum LwSolveStatus lw_report_status(const struct LwReport *r);

// Objective value of the returned ensemble (meaningful when optimal).
//
// # Safety
// `r` must be a live report handle.
double lw_report_optimum(const struct LwReport *r);

// Largest equality violation and smallest block eigenvalue.
//
// # Safety
// `r` must be a live report handle; the out pointers null or writable.
enum LwError lw_report_residuals(const struct LwReport *r,
                                 double *max_equality_violation,
                                 double *min_block_eigenvalue);

// # Safety
// `r` must be a live report handle.
size_t lw_report_iterations(const struct LwReport *r);

// # Safety
// `r` must be null or a report handle not yet freed.
void lw_report_free(struct LwReport *r);

// Bisection for the critical efficiency of an angle witness over
// `[lo, hi]`. Writes the estimate and the final bracket.
//
// # Safety
// `w` must be a live handle built with [`lw_witness_theta`]; `a`/`b` null or
// valid for 3 reads; out pointers writable (bracket pointers may be null).
enum LwError lw_critical_eta(const struct LwWitness *w,
                             enum LwStrategy kind,
                             const double *a,
                             const double *b,
                             double tol,
                             double lo,
                             double hi,
                             double *eta_crit,
                             double *bracket_lo,
                             double *bracket_hi);

// Closed-form Bell-witness minimum under the discard strategy.
//
// # Safety
// `out` must be writable.
enum LwError lw_discard_bell_min(double eta, double *out);

// Closed-form Bell-witness minimum under the assignment strategy with
// zero assignment vectors.
//
// # Safety
// `out` must be writable.
enum LwError lw_assignment_bell_min_zero(double eta, double *out);

// Library version as a static NUL-terminated string.
const char *lw_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOSSY_WITNESS_H */
