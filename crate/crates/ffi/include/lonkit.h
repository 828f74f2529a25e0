#ifndef LONKIT_H
#define LONKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LonkitStatus {
  LONKIT_STATUS_OK = 0,
  LONKIT_STATUS_NULL_POINTER = 1,
  LONKIT_STATUS_INVALID_ARGUMENT = 2,
  LONKIT_STATUS_PARSE = 3,
  LONKIT_STATUS_IO = 4,
  // The requested quantity is undefined for this input.
  LONKIT_STATUS_UNDEFINED = 5,
  LONKIT_STATUS_BUFFER_TOO_SMALL = 6,
  LONKIT_STATUS_FAILURE = 7,
  LONKIT_STATUS_PANIC = 8,
} LonkitStatus;

// Opaque network handle. Release with `lonkit_lon_free`.
typedef struct LonkitLon LonkitLon;

// Scalar metrics of one network. `ac` and `nd` are only meaningful when the
// matching `*_defined` flag is set.
typedef struct LonkitMetrics {
  size_t vn;
  size_t en;
  double spl;
  double spl_reachable_fraction;
  double ac;
  bool ac_defined;
  double acc;
  double nd;
  bool nd_defined;
  size_t funnel_count;
  size_t go_neighborhood_radius;
  double global_optimum_fitness;
} LonkitMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *lonkit_last_error(void);

// Static, NUL-terminated crate version.
const char *lonkit_version(void);

// Parses a network from its JSON document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum LonkitStatus lonkit_lon_from_json(const char *json, struct LonkitLon **out);

// Reads a network JSON file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum LonkitStatus lonkit_lon_load(const char *path, struct LonkitLon **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `lon` must come from this library and not be used afterwards.
void lonkit_lon_free(struct LonkitLon *lon);

// # Safety
// `lon` must be a live handle; `out` must be writable.
enum LonkitStatus lonkit_lon_vertex_count(const struct LonkitLon *lon, size_t *out);

// # Safety
// `lon` must be a live handle; `out` must be writable.
enum LonkitStatus lonkit_lon_edge_count(const struct LonkitLon *lon, size_t *out);

// Serializes a network to JSON. Release the string with `lonkit_string_free`.
//
// # Safety
// `lon` must be a live handle; `out` must be writable.
enum LonkitStatus lonkit_lon_to_json(const struct LonkitLon *lon, char **out);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void lonkit_string_free(char *s);

// Removes inferior sinks; the input handle is left untouched.
//
// # Safety
// `lon` must be a live handle; `out` must be writable.
enum LonkitStatus lonkit_lon_prune(const struct LonkitLon *lon, struct LonkitLon **out);

// Merges `count` networks into a new one.
//
// # Safety
// `lons` must point to `count` live handles; `out` must be writable.
enum LonkitStatus lonkit_lon_synthesize(const struct LonkitLon *const *lons,
                                        size_t count,
                                        struct LonkitLon **out);

// # Safety
// `lon` must be a live handle; `out` must be writable.
enum LonkitStatus lonkit_lon_metrics(const struct LonkitLon *lon, struct LonkitMetrics *out);

// Writes the `dimension`-long unit embedding of `lon` into `out`, which must
// hold at least `dimension` values.
//
// # Safety
// `lon` must be a live handle; `out` must point to `out_len` writable doubles.
enum LonkitStatus lonkit_lon_embed(const struct LonkitLon *lon,
                                   size_t wl_iterations,
                                   size_t dimension,
                                   uint64_t hash_seed,
                                   double *out,
                                   size_t out_len);

// Two-sided rank-sum p-value of samples `a` and `b`.
//
// # Safety
// `a` and `b` must point to `a_len` and `b_len` doubles; `p_value` must be writable.
enum LonkitStatus lonkit_wilcoxon(const double *a,
                                  size_t a_len,
                                  const double *b,
                                  size_t b_len,
                                  double *p_value);

// Pearson correlation of two equally long samples.
//
// # Safety
// `x` and `y` must point to `len` doubles; `out` must be writable.
enum LonkitStatus lonkit_pcc(const double *x, const double *y, size_t len, double *out);

// Samples one network from an NK(n, k) landscape with default sampler
// parameters.
//
// # Safety
// `out` must be writable.
enum LonkitStatus lonkit_sample_nk(size_t n,
                                   size_t k,
                                   uint64_t landscape_seed,
                                   uint64_t run_seed,
                                   struct LonkitLon **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LONKIT_H */
