#ifndef GEVMDPD_H
#define GEVMDPD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GevmdpdStatus {
  GEVMDPD_STATUS_OK = 0,
  GEVMDPD_STATUS_NULL_POINTER = 1,
  GEVMDPD_STATUS_INVALID_PARAMETER = 2,
  GEVMDPD_STATUS_OUT_OF_SUPPORT = 3,
  GEVMDPD_STATUS_INFEASIBLE = 4,
  GEVMDPD_STATUS_DATA_ERROR = 5,
  GEVMDPD_STATUS_NON_CONVERGENCE = 6,
  GEVMDPD_STATUS_INTEGRABILITY_VIOLATION = 7,
  GEVMDPD_STATUS_SINGULAR_MATRIX = 8,
  GEVMDPD_STATUS_INFINITE_MOMENT = 9,
  GEVMDPD_STATUS_NUMERICAL_ERROR = 10,
  GEVMDPD_STATUS_PANIC = 11,
} GevmdpdStatus;

// A fitted model. Opaque to C.
typedef struct GevmdpdFit GevmdpdFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread. Valid until the next call on the same thread.
const char *gevmdpd_last_error(void);

// Library version as a static NUL-terminated string.
const char *gevmdpd_version(void);

// # Safety
// `out` must be valid for one write.
enum GevmdpdStatus gevmdpd_pdf(double mu, double sigma, double xi, double x, double *out);

// # Safety
// `out` must be valid for one write.
enum GevmdpdStatus gevmdpd_cdf(double mu, double sigma, double xi, double x, double *out);

// # Safety
// `out` must be valid for one write.
enum GevmdpdStatus gevmdpd_quantile(double mu, double sigma, double xi, double p, double *out);

// Fill `out[0..n]` with a sample that depends only on the parameters and `seed`.
//
// # Safety
// `out` must be valid for `n` writes.
enum GevmdpdStatus gevmdpd_sample(double mu,
                                  double sigma,
                                  double xi,
                                  size_t n,
                                  uint64_t seed,
                                  double *out);

// Fit by minimum density power divergence; `alpha = 0` gives maximum likelihood.
//
// A handle is returned even when the optimizer did not converge; check
// [`gevmdpd_fit_converged`].
//
// # Safety
// `data` must be valid for `n` reads and `out` for one write.
enum GevmdpdStatus gevmdpd_fit(const double *data, size_t n, double alpha, struct GevmdpdFit **out);

// # Safety
// `fit` must come from [`gevmdpd_fit`]; `out` must be valid for three writes.
enum GevmdpdStatus gevmdpd_fit_params(const struct GevmdpdFit *fit, double *out);

// Writes 1 if the fit converged, else 0.
//
// # Safety
// `fit` must come from [`gevmdpd_fit`]; `out` must be valid for one write.
enum GevmdpdStatus gevmdpd_fit_converged(const struct GevmdpdFit *fit, int32_t *out);

// Sandwich standard errors of (mu, sigma, xi) for the fitted sample size.
//
// # Safety
// `fit` must come from [`gevmdpd_fit`]; `out` must be valid for three writes.
enum GevmdpdStatus gevmdpd_fit_std_errors(const struct GevmdpdFit *fit, double *out);

// Release a fit. Null is ignored.
//
// # Safety
// `fit` must come from [`gevmdpd_fit`] and not be used afterwards.
void gevmdpd_fit_free(struct GevmdpdFit *fit);

// # Safety
// `out` must be valid for one write.
enum GevmdpdStatus gevmdpd_wasserstein1(double mu1,
                                        double sigma1,
                                        double xi1,
                                        double mu2,
                                        double sigma2,
                                        double xi2,
                                        double *out);

// Influence function of the estimator at `x`.
//
// # Safety
// `out` must be valid for three writes.
enum GevmdpdStatus gevmdpd_influence(double mu,
                                     double sigma,
                                     double xi,
                                     double alpha,
                                     double x,
                                     double *out);

// Asymptotic covariance of `sqrt(n)` times the estimator, row-major 3x3.
//
// # Safety
// `out` must be valid for nine writes.
enum GevmdpdStatus gevmdpd_asymptotic_covariance(double mu,
                                                 double sigma,
                                                 double xi,
                                                 double alpha,
                                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEVMDPD_H */
