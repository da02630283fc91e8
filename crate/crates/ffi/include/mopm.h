#ifndef MOPM_H
#define MOPM_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum MopmStatus {
  MOPM_STATUS_OK = 0,
  MOPM_STATUS_INVALID_ARGUMENT = 1,
  MOPM_STATUS_INSUFFICIENT_DATA = 2,
  MOPM_STATUS_OUT_OF_RANGE = 3,
  MOPM_STATUS_NULL_POINTER = 4,
  MOPM_STATUS_PANIC = 5,
  MOPM_STATUS_INTERNAL = 6,
} MopmStatus;

/**
 * Block-drawing scheme: without (`SWOR`) or with (`MC`) replacement.
 */
typedef enum MopmScheme {
  MOPM_SCHEME_SWOR = 0,
  MOPM_SCHEME_MC = 1,
} MopmScheme;

typedef enum MopmEstimator {
  MOPM_ESTIMATOR_MOM = 0,
  MOPM_ESTIMATOR_MORM = 1,
  MOPM_ESTIMATOR_MOU = 2,
  MOPM_ESTIMATOR_MORU = 3,
  MOPM_ESTIMATOR_MOM_SPLIT_PAIRS = 4,
  MOPM_ESTIMATOR_MOIU = 5,
  MOPM_ESTIMATOR_MOGU = 6,
  MOPM_ESTIMATOR_MORGU = 7,
} MopmEstimator;

/**
 * Opaque pairwise kernel.
 */
typedef struct MopmKernel MopmKernel;

/**
 * Opaque sample of `n` points in dimension `dim`.
 */
typedef struct MopmSample MopmSample;

/**
 * Kernel callback: `h(x, y)` for two points of dimension `dim`. Must be
 * symmetric and must not unwind.
 */
typedef double (*MopmKernelFn)(const double *x, const double *y, size_t dim, void *ctx);

/**
 * Planner output. `tau` is NaN when the estimator has none, `m` is 0
 * except for MoIU, and `radius` is meaningful only when `has_radius`.
 */
typedef struct MopmPlan {
  enum MopmEstimator estimator;
  size_t n;
  double delta;
  double tau;
  size_t k;
  size_t b;
  size_t m;
  bool has_radius;
  double radius;
} MopmPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mopm_version(void);

/**
 * Message of the last failed call on this thread, or NULL.
 */
const char *mopm_last_error_message(void);

/**
 * Copy `n * dim` row-major values into a new sample.
 *
 * # Safety
 * `data` must point to `n * dim` readable doubles; `out` must be writable.
 */
enum MopmStatus mopm_sample_new(const double *data, size_t n, size_t dim, struct MopmSample **out);

/**
 * # Safety
 * `sample` must be NULL or a handle from [`mopm_sample_new`] not yet freed.
 */
void mopm_sample_free(struct MopmSample *sample);

/**
 * Number of points, or 0 for NULL.
 *
 * # Safety
 * `sample` must be NULL or a live handle.
 */
size_t mopm_sample_len(const struct MopmSample *sample);

/**
 * The variance kernel `|x - y|^2 / 2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MopmStatus mopm_kernel_new_variance(struct MopmKernel **out);

/**
 * A kernel calling `f(x, y, dim, ctx)`.
 *
 * # Safety
 * `f` must stay callable with `ctx` for the lifetime of the kernel, and
 * `out` must be writable.
 */
enum MopmStatus mopm_kernel_new_callback(MopmKernelFn f, void *ctx, struct MopmKernel **out);

/**
 * # Safety
 * `kernel` must be NULL or a live handle.
 */
void mopm_kernel_free(struct MopmKernel *kernel);

/**
 * Lower median of `n` values.
 *
 * # Safety
 * `values` must point to `n` readable doubles; `out` must be writable.
 */
enum MopmStatus mopm_median(const double *values, size_t n, double *out);

/**
 * Median-of-Means over `k` partition blocks.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MopmStatus mopm_mom(const struct MopmSample *sample, size_t k, uint64_t seed, double *out);

/**
 * Median-of-Randomized-Means over `k` blocks of size `b`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MopmStatus mopm_morm(const struct MopmSample *sample,
                          size_t k,
                          size_t b,
                          enum MopmScheme scheme,
                          uint64_t seed,
                          double *out);

/**
 * Complete U-statistic of `kernel` on `sample`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MopmStatus mopm_complete_ustat(const struct MopmSample *sample,
                                    const struct MopmKernel *kernel,
                                    double *out);

/**
 * Median of U-statistics over `k` partition blocks.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MopmStatus mopm_mou(const struct MopmSample *sample,
                         const struct MopmKernel *kernel,
                         size_t k,
                         uint64_t seed,
                         double *out);

/**
 * Median of U-statistics over `k` SWoR blocks of size `b`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MopmStatus mopm_moru(const struct MopmSample *sample,
                          const struct MopmKernel *kernel,
                          size_t k,
                          size_t b,
                          uint64_t seed,
                          double *out);

/**
 * MoM with `k` blocks over the kernel values of the `n/2` split pairs.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MopmStatus mopm_split_pairs(const struct MopmSample *sample,
                                 const struct MopmKernel *kernel,
                                 size_t k,
                                 uint64_t seed,
                                 double *out);

/**
 * Median of `k` incomplete U-statistics over `m` sampled pairs each.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MopmStatus mopm_moiu(const struct MopmSample *sample,
                          const struct MopmKernel *kernel,
                          size_t k,
                          size_t m,
                          enum MopmScheme scheme,
                          uint64_t seed,
                          double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MopmStatus mopm_plan_mom(size_t n, double delta, double sigma, struct MopmPlan *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MopmStatus mopm_plan_morm(size_t n,
                               double delta,
                               double tau,
                               double sigma,
                               struct MopmPlan *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MopmStatus mopm_plan_mou(size_t n,
                              double delta,
                              double sigma1_sq,
                              double sigma2_sq,
                              struct MopmPlan *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MopmStatus mopm_plan_moru(size_t n,
                               double delta,
                               double tau,
                               double sigma1_sq,
                               double sigma2_sq,
                               struct MopmPlan *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MopmStatus mopm_plan_split_pairs(size_t n,
                                      double delta,
                                      double sigma_sq,
                                      struct MopmPlan *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MopmStatus mopm_plan_moiu(size_t n,
                               double delta,
                               double tau,
                               size_t m,
                               enum MopmScheme scheme,
                               struct MopmPlan *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOPM_H */
