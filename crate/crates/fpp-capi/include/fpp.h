/* C interface to the fpp first-passage percolation laboratory. */

#ifndef FPP_H
#define FPP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum FppStatus {
  FPP_STATUS_OK = 0,
  FPP_STATUS_NULL_POINTER = 1,
  FPP_STATUS_INVALID_ARGUMENT = 2,
  FPP_STATUS_CAP_EXCEEDED = 3,
  FPP_STATUS_UNREACHABLE = 4,
  /**
   * A mathematical verification failed; indicates a library bug.
   */
  FPP_STATUS_VERIFICATION_FAILED = 5,
  FPP_STATUS_INTERNAL_ERROR = 6,
} FppStatus;

/**
 * Opaque configuration handle.
 */
typedef struct FppConfiguration FppConfiguration;

/**
 * Opaque box geometry handle.
 */
typedef struct FppGeometry FppGeometry;

/**
 * One Monte Carlo estimate of the time constant.
 */
typedef struct FppEstimate {
  double p;
  size_t n;
  size_t replicates;
  double mean;
  double std_dev;
  double standard_error;
  double ci_half_width;
  uint64_t seed;
} FppEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Artifact name and version as a static NUL-terminated string.
 */
const char *fpp_version(void);

/**
 * Static human-readable description of a status code.
 */
const char *fpp_status_message(enum FppStatus status);

/**
 * Build the standard box `[0, n]^d`. On success stores a new handle in
 * `out`; release it with `fpp_geometry_free`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FppStatus fpp_geometry_new(size_t d, size_t n, struct FppGeometry **out);

/**
 * Release a geometry handle. Null is a no-op.
 *
 * # Safety
 * `geometry` must have come from `fpp_geometry_new` and not been freed.
 */
void fpp_geometry_free(struct FppGeometry *geometry);

/**
 * Vertex and edge counts of a geometry. Either out pointer may be null.
 *
 * # Safety
 * `geometry` must be a live handle.
 */
enum FppStatus fpp_geometry_counts(const struct FppGeometry *geometry,
                                   size_t *vertices,
                                   size_t *edges);

/**
 * Sample a configuration: each edge gets time 0 with probability `p`,
 * deterministically in `(seed, replicate)`.
 *
 * # Safety
 * `geometry` must be a live handle and `out` a valid pointer.
 */
enum FppStatus fpp_configuration_sample(const struct FppGeometry *geometry,
                                        double p,
                                        uint64_t seed,
                                        uint64_t replicate,
                                        struct FppConfiguration **out);

/**
 * Release a configuration handle. Null is a no-op.
 *
 * # Safety
 * `configuration` must have come from this library and not been freed.
 */
void fpp_configuration_free(struct FppConfiguration *configuration);

/**
 * Passage time (0 or 1) of one edge.
 *
 * # Safety
 * `configuration` must be a live handle and `out` a valid pointer.
 */
enum FppStatus fpp_configuration_time(const struct FppConfiguration *configuration,
                                      size_t edge,
                                      uint8_t *out);

/**
 * Flip the passage time of one edge in place.
 *
 * # Safety
 * `configuration` must be a live handle.
 */
enum FppStatus fpp_configuration_flip(struct FppConfiguration *configuration, size_t edge);

/**
 * Box-crossing time of a configuration.
 *
 * # Safety
 * `configuration` must be a live handle and `out` a valid pointer.
 */
enum FppStatus fpp_phi(const struct FppConfiguration *configuration, uint32_t *out);

/**
 * Number of pivotal edges of the event `{phi >= k}` at a configuration.
 *
 * # Safety
 * `configuration` must be a live handle and `out` a valid pointer.
 */
enum FppStatus fpp_pivotal_count(const struct FppConfiguration *configuration,
                                 uint32_t k,
                                 size_t *out);

/**
 * Monte Carlo estimate of the time constant; fills `out`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FppStatus fpp_estimate_mu(size_t d,
                               size_t n,
                               double p,
                               size_t replicates,
                               uint64_t seed,
                               struct FppEstimate *out);

/**
 * Exactly verify the derivative identity for `{phi >= k}` on `[0, n]^d`.
 * Returns `Ok` when the identity holds coefficient by coefficient.
 */
enum FppStatus fpp_verify_russo(size_t d, size_t n, uint32_t k, size_t cap);

/**
 * Exactly verify the pointwise pivotal bounds for `{phi >= k}`.
 */
enum FppStatus fpp_verify_pivotal_bounds(size_t d, size_t n, uint32_t k, size_t cap);

/**
 * Exactly verify that `E[phi] / (1 - p)` is non-increasing on a grid of
 * `grid_points` rationals in `[0, 999/1000]`.
 */
enum FppStatus fpp_verify_monotonicity(size_t d, size_t n, size_t grid_points, size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPP_H */
