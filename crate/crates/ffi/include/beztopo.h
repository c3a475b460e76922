#ifndef BEZTOPO_H
#define BEZTOPO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Certification levels, weakest first.
typedef enum BztLevel {
  BZT_LEVEL_SIMPLE_PIECES = 0,
  BZT_LEVEL_HOMEOMORPHIC = 1,
  BZT_LEVEL_ISOTOPIC = 2,
} BztLevel;

// Result of every fallible call.
typedef enum BztStatus {
  BZT_STATUS_OK = 0,
  BZT_STATUS_NULL_POINTER = 1,
  BZT_STATUS_INVALID_INPUT = 2,
  BZT_STATUS_DOMAIN = 3,
  BZT_STATUS_PARSE = 4,
  BZT_STATUS_VALIDATION = 5,
  BZT_STATUS_REGULARITY_UNVERIFIED = 6,
  BZT_STATUS_NOT_SIMPLE = 7,
  BZT_STATUS_RESOURCE = 8,
  BZT_STATUS_IO = 9,
  // The buffer passed in was too small; the required size was written.
  BZT_STATUS_BUFFER_TOO_SMALL = 10,
  BZT_STATUS_INTERNAL = 11,
} BztStatus;

// A composite Bézier curve.
typedef struct BztCurve BztCurve;

// The pieces of a subdivided curve.
typedef struct BztSubdivision BztSubdivision;

// Constants and iteration counts for one curve and pipe radius.
typedef struct BztBounds {
  uint32_t degree;
  double m;
  double sigma;
  double delta2_p;
  double delta2_pprime;
  double pipe_radius;
  double n1;
  double n_prime_r;
  double n_prime_half_r;
  double n2;
  double n_hat;
  double n_star;
  uint32_t simplicity;
  uint32_t homeomorphism;
  uint32_t isotopy;
} BztBounds;

// Summary of a certificate.
typedef struct BztCertificate {
  bool verified;
  // Iterations the theorem asks for; -1 if certification stopped earlier.
  int32_t required_iterations;
  // Iterations performed; -1 if none.
  int32_t iterations;
  // Radius used; 0 if none could be determined.
  double pipe_radius;
  // Number of checks run and how many failed.
  uint32_t checks;
  uint32_t failed_checks;
} BztCertificate;

// Message for the last failed call on this thread, or NULL. The pointer is
// valid until the next `bzt_*` call on the same thread.
const char *bzt_last_error_message(void);

// Builds a curve from `segment_count · (degree + 1)` points stored as
// consecutive `x, y, z` triples.
//
// # Safety
// `xyz` must point to `len` readable doubles and `out` must be writable.
enum BztStatus bzt_curve_new(uint32_t degree,
                             uint32_t segment_count,
                             const double *xyz,
                             uintptr_t len,
                             struct BztCurve **out);

// Reads and validates a curve file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` must be writable.
enum BztStatus bzt_curve_load(const char *path, struct BztCurve **out);

// Releases a curve. NULL is ignored.
//
// # Safety
// `curve` must come from `bzt_curve_new`/`bzt_curve_load` and not be used
// afterwards.
void bzt_curve_free(struct BztCurve *curve);

// Degree of the curve, or 0 for NULL.
//
// # Safety
// `curve` must be NULL or a live handle.
uint32_t bzt_curve_degree(const struct BztCurve *curve);

// Number of segments, or 0 for NULL.
//
// # Safety
// `curve` must be NULL or a live handle.
uint32_t bzt_curve_segment_count(const struct BztCurve *curve);

// Writes the point at global parameter `t ∈ [0, 1]` to `out[0..3]`.
//
// # Safety
// `curve` must be a live handle and `out` must hold three doubles.
enum BztStatus bzt_curve_evaluate(const struct BztCurve *curve, double t, double *out);

// Computes constants and iteration bounds. A non-positive `pipe_radius`
// selects the built-in estimate.
//
// # Safety
// `curve` must be a live handle and `out` must be writable.
enum BztStatus bzt_curve_bounds(const struct BztCurve *curve,
                                double pipe_radius,
                                struct BztBounds *out);

// Certifies `level`, a `BztLevel` value. A failed check is not an error: the call returns
// `BZT_STATUS_OK` with `verified = false`. `pipe_radius <= 0` estimates the
// radius and `samples == 0` uses the default sample count.
//
// # Safety
// `curve` must be a live handle and `out` must be writable.
enum BztStatus bzt_certify(const struct BztCurve *curve,
                           uint32_t level,
                           double pipe_radius,
                           uintptr_t samples,
                           struct BztCertificate *out);

// Like `bzt_certify` but returns the full certificate as a JSON string to
// be released with `bzt_string_free`.
//
// # Safety
// `curve` must be a live handle and `out` must be writable.
enum BztStatus bzt_certify_json(const struct BztCurve *curve,
                                uint32_t level,
                                double pipe_radius,
                                uintptr_t samples,
                                char **out);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void bzt_string_free(char *s);

// Applies `iterations` rounds of midpoint subdivision.
//
// # Safety
// `curve` must be a live handle and `out` must be writable.
enum BztStatus bzt_subdivide(const struct BztCurve *curve,
                             uint32_t iterations,
                             struct BztSubdivision **out);

// Releases a subdivision. NULL is ignored.
//
// # Safety
// `sub` must come from `bzt_subdivide` and not be used afterwards.
void bzt_subdivision_free(struct BztSubdivision *sub);

// Number of pieces, or 0 for NULL.
//
// # Safety
// `sub` must be NULL or a live handle.
uintptr_t bzt_subdivision_piece_count(const struct BztSubdivision *sub);

// Copies the union control polygon into `xyz` as `x, y, z` triples.
// `needed` receives the number of doubles required; if `capacity` is
// smaller, nothing is copied and `BZT_STATUS_BUFFER_TOO_SMALL` is returned.
//
// # Safety
// `sub` must be a live handle, `needed` writable, and `xyz` must hold
// `capacity` doubles (it may be NULL when `capacity` is 0).
enum BztStatus bzt_subdivision_union_polygon(const struct BztSubdivision *sub,
                                             double *xyz,
                                             uintptr_t capacity,
                                             uintptr_t *needed);

// Library version as a static NUL-terminated string.
const char *bzt_version(void);

#endif  /* BEZTOPO_H */
