#ifndef REEB_EH_H
#define REEB_EH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Values are stable.
 */
typedef enum ReebEhStatus {
  REEB_EH_STATUS_OK = 0,
  REEB_EH_STATUS_NULL_POINTER = 1,
  REEB_EH_STATUS_INVALID_UTF8 = 2,
  REEB_EH_STATUS_PARSE_ERROR = 3,
  REEB_EH_STATUS_INFEASIBLE_POLYTOPE = 4,
  REEB_EH_STATUS_NOT_IN_CONE = 5,
  REEB_EH_STATUS_NO_CONVERGENCE = 6,
  REEB_EH_STATUS_SEGMENT_EXITS_CONE = 7,
  REEB_EH_STATUS_NONPOSITIVE_HEIGHT = 8,
  REEB_EH_STATUS_REEB_DEGENERATES_ON_TOTAL = 9,
  REEB_EH_STATUS_RANGE_VIOLATION = 10,
  REEB_EH_STATUS_UNCALIBRATED = 11,
  REEB_EH_STATUS_SCHEMA_MISMATCH = 12,
  REEB_EH_STATUS_INVALID_INPUT = 13,
  REEB_EH_STATUS_IO = 14,
  REEB_EH_STATUS_PANIC = 15,
} ReebEhStatus;

/**
 * Opaque polytope handle with its cached triangulation and facet chart.
 */
typedef struct ReebEhPolytope ReebEhPolytope;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *reeb_eh_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next library call on the same thread.
 */
const char *reeb_eh_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void reeb_eh_string_free(char *s);

/**
 * Parses a polytope `{"dim": n, "facets": [...]}` into a new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ReebEhStatus reeb_eh_polytope_from_json(const char *json, struct ReebEhPolytope **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `p` must come from [`reeb_eh_polytope_from_json`] and not be used again.
 */
void reeb_eh_polytope_free(struct ReebEhPolytope *p);

/**
 * Dimension of the polytope.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum ReebEhStatus reeb_eh_polytope_dim(const struct ReebEhPolytope *p, size_t *out);

/**
 * Vertices, volume, barycenter and flags as JSON.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum ReebEhStatus reeb_eh_polytope_summary(const struct ReebEhPolytope *p, char **out);

/**
 * Exact `V`, `S`, `S^{n+1}/V^n` and float EH at a Reeb vector given as
 * `{"a0": .., "a": [..]}` (NULL means the constant function 1).
 *
 * # Safety
 * `p` must be a live handle, `reeb` NULL or a NUL-terminated string, `out` writable.
 */
enum ReebEhStatus reeb_eh_eval(const struct ReebEhPolytope *p, const char *reeb, char **out);

/**
 * Float EH at homogeneous coordinates `(a0, a1, .., an)`.
 *
 * # Safety
 * `p` must be a live handle, `coords` must point to `len` doubles, `out` writable.
 */
enum ReebEhStatus reeb_eh_eval_f64(const struct ReebEhPolytope *p,
                                   const double *coords,
                                   size_t len,
                                   double *out);

/**
 * Exact scaled gradient and Hessian plus their float EH counterparts.
 *
 * # Safety
 * As for [`reeb_eh_eval`].
 */
enum ReebEhStatus reeb_eh_derivatives(const struct ReebEhPolytope *p, const char *reeb, char **out);

/**
 * Global minimum of EH on the slice. `options` is SearchOptions JSON or NULL.
 *
 * # Safety
 * `p` must be a live handle, `options` NULL or NUL-terminated, `out` writable.
 */
enum ReebEhStatus reeb_eh_minimize(const struct ReebEhPolytope *p,
                                   const char *options_json,
                                   char **out);

/**
 * All critical points found by multi-start.
 *
 * # Safety
 * As for [`reeb_eh_minimize`].
 */
enum ReebEhStatus reeb_eh_critical_points(const struct ReebEhPolytope *p,
                                          const char *options_json,
                                          char **out);

/**
 * EH of the toric test configuration with height `{"pieces": [..]}` at
 * parameter `s` (a rational string). `dictionary` may be NULL for the
 * default. The result is always marked uncalibrated.
 *
 * # Safety
 * `p` must be a live handle, string arguments NULL (where allowed) or
 * NUL-terminated, `out` writable.
 */
enum ReebEhStatus reeb_eh_testconfig_eh(const struct ReebEhPolytope *p,
                                        const char *reeb,
                                        const char *height,
                                        const char *s,
                                        const char *dictionary,
                                        char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REEB_EH_H */
