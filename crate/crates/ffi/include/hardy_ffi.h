#ifndef HARDY_FFI_H
#define HARDY_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HardyStatus {
  HARDY_STATUS_OK = 0,
  HARDY_STATUS_NULL_POINTER = 1,
  HARDY_STATUS_INVALID_ARGUMENT = 2,
  HARDY_STATUS_INVALID_DIMENSION = 3,
  HARDY_STATUS_OUT_OF_RANGE = 4,
  HARDY_STATUS_DOMAIN = 5,
  HARDY_STATUS_SYMMETRY_VIOLATION = 6,
  HARDY_STATUS_DEGENERATE = 7,
  HARDY_STATUS_PANIC = 99,
} HardyStatus;

typedef enum HardyClass {
  HARDY_CLASS_GENERAL = 0,
  HARDY_CLASS_ANTISYMMETRIC = 1,
  HARDY_CLASS_ODD = 2,
} HardyClass;

typedef enum HardyFunctional {
  HARDY_FUNCTIONAL_HARDY = 0,
  HARDY_FUNCTIONAL_RELLICH = 1,
} HardyFunctional;

typedef enum HardyMethod {
  HARDY_METHOD_MONTE_CARLO = 0,
  HARDY_METHOD_PRODUCT = 1,
  HARDY_METHOD_FACTORIZED = 2,
} HardyMethod;

/**
 * Opaque trial function `F(x) ψ(|x|)`.
 */
typedef struct HardyTrial HardyTrial;

/**
 * Closed-form constant with its admissibility condition.
 */
typedef struct HardyConstant {
  double value;
  double condition_residual;
  bool admissible;
} HardyConstant;

typedef struct HardyMinimax {
  double alpha_star;
  double beta_star;
  double t_star;
  double value_numeric;
  double value_closed_form;
  double gap;
  bool converged;
} HardyMinimax;

/**
 * `verdict`: 0 holds, 1 inconclusive, 2 violated.
 */
typedef struct HardyQuotient {
  double numerator;
  double numerator_error;
  double denominator;
  double denominator_error;
  double quotient;
  double quotient_error;
  double constant;
  double margin;
  int32_t verdict;
} HardyQuotient;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, 0 if none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t hardy_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hardy_version(void);

/**
 * Best constant for `functional` on `class` in dimension `d`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum HardyStatus hardy_constant(size_t d,
                                double p,
                                double gamma,
                                enum HardyClass class_,
                                enum HardyFunctional functional,
                                struct HardyConstant *out);

/**
 * `∏_{i<j}(x_j − x_i)` for `x` of length `d ≥ 2`.
 *
 * # Safety
 * `x` must point to `d` readable doubles; `out` must be valid for writes.
 */
enum HardyStatus hardy_vandermonde_value(const double *x, size_t d, double *out);

/**
 * Gradient of the Vandermonde product, written to `grad[0..d]`.
 *
 * # Safety
 * `x` must point to `d` readable doubles and `grad` to `d` writable doubles.
 */
enum HardyStatus hardy_vandermonde_gradient(const double *x, size_t d, double *grad);

/**
 * Numeric max–min of the certificate with the default search settings.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum HardyStatus hardy_minimax(size_t d,
                               double p,
                               double gamma,
                               enum HardyClass class_,
                               struct HardyMinimax *out);

/**
 * Gaussian trial `F(x) exp(−|x|²/(2σ²))` with `F` chosen by `class`.
 *
 * # Safety
 * `out` must be valid for writes; on success it receives a handle to be
 * released with [`hardy_trial_free`].
 */
enum HardyStatus hardy_trial_gaussian(enum HardyClass class_,
                                      size_t d,
                                      double sigma,
                                      struct HardyTrial **out);

/**
 * Smoothed near-extremal Rellich family with exponent gap `epsilon` and
 * collar half-width `delta`.
 *
 * # Safety
 * As for [`hardy_trial_gaussian`].
 */
enum HardyStatus hardy_trial_sharpness(enum HardyClass class_,
                                       size_t d,
                                       double epsilon,
                                       double delta,
                                       struct HardyTrial **out);

/**
 * Releases a trial handle. Null is ignored.
 *
 * # Safety
 * `trial` must be null or a handle from this library not yet freed.
 */
void hardy_trial_free(struct HardyTrial *trial);

/**
 * Evaluates the trial at `x[0..d]`; `d` must equal the trial dimension.
 *
 * # Safety
 * `trial` must be a live handle, `x` must point to `d` readable doubles and
 * `out` must be valid for writes.
 */
enum HardyStatus hardy_trial_value(const struct HardyTrial *trial,
                                   const double *x,
                                   size_t d,
                                   double *out);

/**
 * Rayleigh quotient of `trial` for `functional` at exponent `p` and weight
 * `gamma`. `samples` and `seed` are used by the Monte Carlo method only.
 *
 * # Safety
 * `trial` must be a live handle and `out` valid for writes.
 */
enum HardyStatus hardy_trial_quotient(const struct HardyTrial *trial,
                                      enum HardyFunctional functional,
                                      double p,
                                      double gamma,
                                      enum HardyMethod method,
                                      uint64_t samples,
                                      uint64_t seed,
                                      struct HardyQuotient *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARDY_FFI_H */
