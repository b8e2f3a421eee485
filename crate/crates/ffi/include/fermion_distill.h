#ifndef FERMION_DISTILL_H
#define FERMION_DISTILL_H

#pragma once

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum FdStatus {
  FD_STATUS_OK = 0,
  FD_STATUS_NULL_POINTER = 1,
  FD_STATUS_INVALID_ARGUMENT = 2,
  FD_STATUS_INVALID_COVARIANCE = 3,
  FD_STATUS_UNSUPPORTED = 4,
  FD_STATUS_NUMERICAL = 5,
  FD_STATUS_IO = 6,
  FD_STATUS_PANIC = 7,
} FdStatus;

/**
 * Opaque covariance matrix handle.
 */
typedef struct FdCovariance FdCovariance;

/**
 * Result of [`fd_run_protocol`]. `rate` and `rate_per_site` are NaN when
 * not available.
 */
typedef struct FdReport {
  size_t d;
  size_t n_keep;
  double f_plus;
  double f_minus;
  double p;
  double f;
  bool distillable;
  double rate;
  double rate_per_site;
} FdReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *fd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fd_version(void);

/**
 * Builds a covariance matrix for `d_a + d_b` modes from the row-major
 * `2(d_a+d_b)` square array `m`. The matrix is validated.
 *
 * # Safety
 * `m` must point to `(2(d_a+d_b))²` doubles and `out` must be writable.
 */
enum FdStatus fd_covariance_new(size_t d_a, size_t d_b, const double *m, struct FdCovariance **out);

/**
 * Reads a covariance file in the plain-text format.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be writable.
 */
enum FdStatus fd_covariance_read_file(const char *path, struct FdCovariance **out);

/**
 * Two adjacent `d`-site blocks of the half-filled hopping chain.
 *
 * # Safety
 * `out` must be writable.
 */
enum FdStatus fd_covariance_chain(size_t d, struct FdCovariance **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `h` must come from an `fd_covariance_*` constructor and not be used again.
 */
void fd_covariance_free(struct FdCovariance *h);

/**
 * Mode counts of Alice and Bob.
 *
 * # Safety
 * `h` must be a live handle; `d_a`, `d_b` must be writable.
 */
enum FdStatus fd_covariance_modes(const struct FdCovariance *h, size_t *d_a, size_t *d_b);

/**
 * Copies the matrix into `buf` (row-major). `len` is the capacity in doubles
 * and must be at least `(2(d_a+d_b))²`.
 *
 * # Safety
 * `h` must be a live handle and `buf` must hold `len` doubles.
 */
enum FdStatus fd_covariance_matrix(const struct FdCovariance *h, double *buf, size_t len);

/**
 * Probability that Alice's and Bob's local parities agree.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum FdStatus fd_equal_parity_probability(const struct FdCovariance *h, double *out);

/**
 * Fidelity with the standard maximally entangled pure state. Needs
 * `d_a == d_b`.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum FdStatus fd_standard_fidelity(const struct FdCovariance *h, double *out);

/**
 * Runs the distillation protocol keeping `n_keep` modes per side.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum FdStatus fd_run_protocol(const struct FdCovariance *h,
                              size_t n_keep,
                              bool conservative_p,
                              struct FdReport *out);

/**
 * Pfaffian of the real antisymmetric `n × n` row-major matrix `a`.
 *
 * # Safety
 * `a` must point to `n²` doubles and `out` must be writable.
 */
enum FdStatus fd_pfaffian(size_t n, const double *a, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FERMION_DISTILL_H */
