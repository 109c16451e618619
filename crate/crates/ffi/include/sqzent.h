#ifndef SQZENT_H
#define SQZENT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SqzStatus {
  SQZ_STATUS_OK = 0,
  SQZ_STATUS_NULL_POINTER = 1,
  SQZ_STATUS_INVALID_ARGUMENT = 2,
  SQZ_STATUS_NOT_STABLE = 3,
  SQZ_STATUS_UNPHYSICAL_BATH = 4,
  SQZ_STATUS_NO_CONVERGENCE = 5,
  SQZ_STATUS_NOT_POSITIVE_DEFINITE = 6,
  SQZ_STATUS_INTERNAL = 7,
} SqzStatus;

typedef enum SqzRepresentation {
  /**
   * Rotating frame with time-dependent anomalous correlations.
   */
  SQZ_REPRESENTATION_ROTATING_M = 0,
  /**
   * Laboratory quadratures with constant diffusion.
   */
  SQZ_REPRESENTATION_LAB_QUADRATURES = 1,
} SqzRepresentation;

/**
 * Opaque model: oscillator parameters plus one bath per mode (vacuum by default).
 */
typedef struct SqzModel SqzModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a model with vacuum baths. On success `*out` owns a new handle.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum SqzStatus sqz_model_new(double omega1,
                             double omega2,
                             double coupling,
                             double gamma1,
                             double gamma2,
                             struct SqzModel **out);

/**
 * # Safety
 * `model` must be null or a handle from `sqz_model_new` not yet freed.
 */
void sqz_model_free(struct SqzModel *model);

/**
 * Squeezed thermal bath on mode `index` (1 or 2).
 *
 * # Safety
 * `model` must be null or a live handle.
 */
enum SqzStatus sqz_model_set_bath(struct SqzModel *model,
                                  uint32_t index,
                                  double nbar,
                                  double r,
                                  double phi);

/**
 * Bath on mode `index` given directly by `N` and `M = m_re + i m_im`.
 * Physicality is checked when the model is solved.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
enum SqzStatus sqz_model_set_bath_raw(struct SqzModel *model,
                                      uint32_t index,
                                      double n,
                                      double m_re,
                                      double m_im);

/**
 * Rotating-frame steady covariance, 16 entries row-major in `(x1, p1, x2, p2)`.
 *
 * # Safety
 * `model` must be null or a live handle; `out_v` null or valid for 16 writes.
 */
enum SqzStatus sqz_model_steady_state(const struct SqzModel *model, double *out_v);

/**
 * Smallest partially transposed symplectic eigenvalue and logarithmic negativity.
 *
 * # Safety
 * `model` must be null or a live handle; outputs null or valid for one write.
 */
enum SqzStatus sqz_model_log_negativity(const struct SqzModel *model,
                                        double *out_nu_minus,
                                        double *out_log_negativity);

/**
 * Lab-frame periodic steady state with default integration settings:
 * mean, minimum and maximum of the logarithmic negativity over one period.
 * Requires `omega1 == omega2` and squeezed thermal (not raw) baths.
 *
 * # Safety
 * `model` must be null or a live handle; outputs null or valid for one write.
 */
enum SqzStatus sqz_model_labframe(const struct SqzModel *model,
                                  enum SqzRepresentation representation,
                                  double *out_mean,
                                  double *out_min,
                                  double *out_max);

/**
 * Symplectic eigenvalues (ascending) of a row-major 4×4 covariance matrix.
 *
 * # Safety
 * `v` must be null or valid for 16 reads; `out` null or valid for 2 writes.
 */
enum SqzStatus sqz_symplectic_eigenvalues(const double *v, double *out);

/**
 * `R(r, J)` of the symmetric resonant closed form; NaN for invalid input.
 */
double sqz_r_function(double gamma, double coupling, double r);

/**
 * Closed-form critical temperature. `*out_finite` is false when the state is
 * separable at every temperature, in which case `*out_tc` is set to 0.
 *
 * # Safety
 * Outputs must be null or valid for one write.
 */
enum SqzStatus sqz_critical_temperature(double gamma,
                                        double coupling,
                                        double r,
                                        double omega,
                                        double *out_tc,
                                        bool *out_finite);

/**
 * Static description of a status code.
 */
const char *sqz_status_message(enum SqzStatus status);

/**
 * Detail of the last failure on this thread, empty after a success. The
 * pointer stays valid until the next call into this library on the same thread.
 */
const char *sqz_last_error(void);

const char *sqz_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQZENT_H */
