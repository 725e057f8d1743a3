/* C interface to the bi-invariant geodesic regression library. */

#ifndef BIGEO_H
#define BIGEO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI entry point.
 */
typedef enum BigeoStatus {
  /**
   * Success.
   */
  BIGEO_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  BIGEO_STATUS_NULL_POINTER = 1,
  /**
   * A matrix argument is not a valid group element.
   */
  BIGEO_STATUS_INVALID_POINT = 2,
  /**
   * The dataset is unusable (fewer than two samples or no two distinct
   * times).
   */
  BIGEO_STATUS_INVALID_DATASET = 3,
  /**
   * A rotation angle reached the principal-branch cut of the logarithm.
   */
  BIGEO_STATUS_BRANCH_CUT = 4,
  /**
   * A solver precondition or configuration was violated.
   */
  BIGEO_STATUS_SOLVER_ERROR = 5,
  /**
   * The coefficient of determination is undefined (zero data variance).
   */
  BIGEO_STATUS_UNDEFINED = 6,
} BigeoStatus;

/**
 * Opaque builder for an SE(3) regression dataset.
 */
typedef struct BigeoDataset BigeoDataset;

/**
 * Opaque fitted geodesic.
 */
typedef struct BigeoFit BigeoFit;

/**
 * Solver configuration; zero/negative fields select the library defaults
 * (lambda 0.1, 5000 iterations, tolerance 1e-9).
 */
typedef struct BigeoSolverConfig {
  double lambda;
  uint64_t max_iters;
  double tol;
} BigeoSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create an empty dataset builder. Free with `bigeo_dataset_free`.
 */
struct BigeoDataset *bigeo_dataset_new(void);

/**
 * Append one sample: an SE(3) pose (9 rotation doubles row-major, then 3
 * translation doubles) observed at scalar parameter `t` in [0, 1].
 *
 * # Safety
 * `ds` must be a live handle from `bigeo_dataset_new`; `pose` must point to
 * 12 readable doubles.
 */
enum BigeoStatus bigeo_dataset_push(struct BigeoDataset *ds, const double *pose, double t);

/**
 * Number of samples currently in the builder (0 for a null handle).
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
uintptr_t bigeo_dataset_len(const struct BigeoDataset *ds);

/**
 * Release a dataset handle; null is a no-op.
 *
 * # Safety
 * `ds` must be null or a handle not freed before.
 */
void bigeo_dataset_free(struct BigeoDataset *ds);

/**
 * Fit the bi-invariant geodesic regressor (net-force fixed point). On
 * success `*out` owns the fit; free with `bigeo_fit_free`.
 *
 * # Safety
 * `ds` must be a live dataset handle; `cfg` may be null for defaults; `out`
 * must point to writable pointer storage.
 */
enum BigeoStatus bigeo_fit_biinvariant(const struct BigeoDataset *ds,
                                       const struct BigeoSolverConfig *cfg,
                                       struct BigeoFit **out);

/**
 * Fit the Riemannian (product-metric) baseline by gradient descent.
 *
 * # Safety
 * Same contract as `bigeo_fit_biinvariant`.
 */
enum BigeoStatus bigeo_fit_riemannian(const struct BigeoDataset *ds,
                                      const struct BigeoSolverConfig *cfg,
                                      struct BigeoFit **out);

/**
 * Read back the fitted endpoints and diagnostics. Any out pointer may be
 * null to skip that field; pose buffers receive 12 doubles.
 *
 * # Safety
 * `fit` must be a live handle; non-null out pointers must be writable.
 */
enum BigeoStatus bigeo_fit_read(const struct BigeoFit *fit,
                                double *g0,
                                double *g1,
                                uint64_t *iterations,
                                double *final_update_norm,
                                bool *converged);

/**
 * Coefficient of determination of a fit on a dataset.
 *
 * # Safety
 * `fit` and `ds` must be live handles; `out` must be writable.
 */
enum BigeoStatus bigeo_r_squared(const struct BigeoFit *fit,
                                 const struct BigeoDataset *ds,
                                 double *out);

/**
 * Release a fit handle; null is a no-op.
 *
 * # Safety
 * `fit` must be null or a handle not freed before.
 */
void bigeo_fit_free(struct BigeoFit *fit);

/**
 * Evaluate the fitted geodesic at parameter `t` (any real; the geodesic is
 * global). Writes 12 doubles.
 *
 * # Safety
 * `fit` must be a live handle; `pose` must point to 12 writable doubles.
 */
enum BigeoStatus bigeo_fit_eval(const struct BigeoFit *fit, double t, double *pose);

/**
 * Geodesic between two SE(3) poses at parameter `t` (12 doubles per pose).
 *
 * # Safety
 * `g0`, `g1` must point to 12 readable doubles each; `pose` to 12 writable.
 */
enum BigeoStatus bigeo_geodesic(const double *g0, const double *g1, double t, double *pose);

/**
 * SE(3) group exponential: 6 algebra coordinates (rotation then translation
 * part) to a pose of 12 doubles.
 *
 * # Safety
 * `coords` must point to 6 readable doubles; `pose` to 12 writable.
 */
enum BigeoStatus bigeo_se3_exp(const double *coords, double *pose);

/**
 * SE(3) group logarithm (principal branch): pose of 12 doubles to 6 algebra
 * coordinates. Fails with `BIGEO_STATUS_BRANCH_CUT` near rotation angle pi.
 *
 * # Safety
 * `pose` must point to 12 readable doubles; `coords` to 6 writable.
 */
enum BigeoStatus bigeo_se3_log(const double *pose, double *coords);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIGEO_H */
