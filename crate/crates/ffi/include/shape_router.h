#ifndef SHAPE_ROUTER_H
#define SHAPE_ROUTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Run the exhaustive baseline instead of routing.
 */
#define SR_FLAG_BRUTE_FORCE 1

/**
 * Re-sort routed answers by distance across classes.
 */
#define SR_FLAG_GLOBAL_SORT 2

typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_ARGUMENT = 1,
  SR_STATUS_INVALID_UTF8 = 2,
  SR_STATUS_IO = 3,
  SR_STATUS_PARSE = 4,
  SR_STATUS_INVALID_ARGUMENT = 5,
  SR_STATUS_MISMATCH = 6,
  SR_STATUS_NOT_FOUND = 7,
  SR_STATUS_PANIC = 8,
} SrStatus;

/**
 * Loaded index: grouped classes, descriptors and in-memory representatives.
 */
typedef struct SrEngine SrEngine;

/**
 * Ranked answers of one query.
 */
typedef struct SrResult SrResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread; never null.
 */
const char *sr_last_error(void);

/**
 * Opens an index from a descriptor cache, a `.cla` file and a grouping
 * file, selecting representatives in memory.
 *
 * # Safety
 * Path arguments must be null or NUL-terminated strings; `out` must be
 * null or writable.
 */
enum SrStatus sr_engine_open(const char *cache_path,
                             const char *cla_path,
                             const char *grouping_path,
                             struct SrEngine **out);

/**
 * # Safety
 * `engine` must be null or a handle from [`sr_engine_open`] not yet freed.
 */
void sr_engine_free(struct SrEngine *engine);

/**
 * # Safety
 * `engine` must be null or a live handle.
 */
uintptr_t sr_engine_class_count(const struct SrEngine *engine);

/**
 * # Safety
 * `engine` must be null or a live handle.
 */
uintptr_t sr_engine_model_count(const struct SrEngine *engine);

/**
 * Total number of representatives `R`.
 *
 * # Safety
 * `engine` must be null or a live handle.
 */
uintptr_t sr_engine_representative_count(const struct SrEngine *engine);

/**
 * Describes the OFF file at `off_path` with the index's parameters and
 * retrieves `k` answers. `class_budget` 0 means all classes; `flags` is a
 * combination of `SR_FLAG_*`.
 *
 * # Safety
 * `engine` must be a live handle, `off_path` a NUL-terminated string and
 * `out` writable.
 */
enum SrStatus sr_engine_query_file(const struct SrEngine *engine,
                                   const char *off_path,
                                   uintptr_t k,
                                   uintptr_t class_budget,
                                   uint32_t flags,
                                   struct SrResult **out);

/**
 * Retrieves with a caller-supplied histogram of `len` bins, which must
 * match the index's bin count and sum to one.
 *
 * # Safety
 * `bins` must point to `len` readable doubles; `engine` must be live and
 * `out` writable.
 */
enum SrStatus sr_engine_query_histogram(const struct SrEngine *engine,
                                        const double *bins,
                                        uintptr_t len,
                                        uintptr_t k,
                                        uintptr_t class_budget,
                                        uint32_t flags,
                                        struct SrResult **out);

/**
 * Routes a database model to its top class. The returned string must be
 * released with [`sr_string_free`].
 *
 * # Safety
 * `engine` must be live, `model_id` NUL-terminated and `out_class`
 * writable.
 */
enum SrStatus sr_engine_route_model(const struct SrEngine *engine,
                                    const char *model_id,
                                    bool exclude_self,
                                    char **out_class);

/**
 * # Safety
 * `result` must be null or a live result handle.
 */
uintptr_t sr_result_len(const struct SrResult *result);

/**
 * Model id of answer `i`; null when out of range. Owned by the result.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
const char *sr_result_model_id(const struct SrResult *result, uintptr_t i);

/**
 * Class of answer `i`; null when out of range. Owned by the result.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
const char *sr_result_class(const struct SrResult *result, uintptr_t i);

/**
 * Distance of answer `i`; NaN when out of range.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
double sr_result_distance(const struct SrResult *result, uintptr_t i);

/**
 * Distance evaluations spent on the query.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
uint64_t sr_result_evaluations(const struct SrResult *result);

/**
 * # Safety
 * `result` must be null or a live result handle.
 */
uintptr_t sr_result_visited_len(const struct SrResult *result);

/**
 * Name of the `i`-th visited class; null when out of range.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
const char *sr_result_visited(const struct SrResult *result, uintptr_t i);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void sr_result_free(struct SrResult *result);

/**
 * L1 distance between two probability histograms of `len` bins.
 *
 * # Safety
 * `a` and `b` must point to `len` readable doubles; `out` must be writable.
 */
enum SrStatus sr_descriptor_distance(const double *a, const double *b, uintptr_t len, double *out);

/**
 * Formats `Q/N` as a report cell such as `90.82% (89/98)`. Release the
 * string with [`sr_string_free`].
 *
 * # Safety
 * `out` must be writable.
 */
enum SrStatus sr_successful_rate_cell(uintptr_t q, uintptr_t n, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void sr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHAPE_ROUTER_H */
