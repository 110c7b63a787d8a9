#ifndef TENTMLE_H
#define TENTMLE_H

/* Generated with cbindgen:0.29.4 */

/* This file is generated by cbindgen from crates/tentmle-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes mirroring the CLI exit codes where they overlap.
typedef enum TentmleStatus {
  TentmleStatus_Ok = 0,
  TentmleStatus_Error = 1,
  TentmleStatus_InvalidInput = 2,
  TentmleStatus_NotConverged = 3,
  TentmleStatus_TooLarge = 4,
  TentmleStatus_NullPointer = 5,
} TentmleStatus;

// Opaque point configuration handle.
typedef struct TentmleConfig TentmleConfig;

// Opaque solve result handle.
typedef struct TentmleResult TentmleResult;

// Options for `tentmle_solve`; zero-initialization is not valid, use
// `tentmle_default_options`.
typedef struct TentmleSolveOptions {
  double grad_tol;
  uint64_t max_iters;
  uint64_t seed;
} TentmleSolveOptions;

// Copy the last error message on this thread into `buf` (NUL-terminated,
// truncated to `cap`). Returns the full message length in bytes.
//
// # Safety
// `buf` must point to at least `cap` writable bytes, or be null (in which
// case only the length is returned).
size_t tentmle_last_error(char *buf, size_t cap);

// Build a configuration from `n` points of dimension `d`, row-major.
//
// # Safety
// `coords` must point to `n * d` doubles; `out` must be a valid pointer.
enum TentmleStatus tentmle_config_new(const double *coords,
                                      size_t n,
                                      size_t d,
                                      struct TentmleConfig **out);

// # Safety
// `config` must be a pointer from `tentmle_config_new`, not yet freed.
void tentmle_config_free(struct TentmleConfig *config);

// Number of points and dimension of a configuration.
//
// # Safety
// `config` must be valid; `n`/`d` may be null.
enum TentmleStatus tentmle_config_shape(const struct TentmleConfig *config, size_t *n, size_t *d);

// Evaluate the symmetric function H at `d` arguments.
//
// # Safety
// `u` must point to `d` doubles and `out` must be valid.
enum TentmleStatus tentmle_h_eval(const double *u, size_t d, double *out);

// Total mass of `exp(tent)` for the given heights.
//
// # Safety
// `heights` must point to `n` doubles; `out` must be valid.
enum TentmleStatus tentmle_total_mass(const struct TentmleConfig *config,
                                      const double *heights,
                                      double *out);

// Default solver options.
struct TentmleSolveOptions tentmle_default_options(void);

// Solve the estimation problem. `weights` may be null for unit weights;
// `options` may be null for defaults. On success `out` owns a result handle
// (including the non-converged case, which returns `NotConverged`).
//
// # Safety
// `weights`, when non-null, must point to `n` doubles; `out` must be valid.
enum TentmleStatus tentmle_solve(const struct TentmleConfig *config,
                                 const double *weights,
                                 const struct TentmleSolveOptions *options,
                                 struct TentmleResult **out);

// # Safety
// `result` must be a pointer from `tentmle_solve`, not yet freed.
void tentmle_result_free(struct TentmleResult *result);

// Copy the optimal heights into `buf` (length `n`).
//
// # Safety
// `buf` must point to `n` writable doubles.
enum TentmleStatus tentmle_result_heights(const struct TentmleResult *result, double *buf);

// # Safety
// `result` must be valid.
double tentmle_result_mass(const struct TentmleResult *result);

// # Safety
// `result` must be valid.
double tentmle_result_log_likelihood(const struct TentmleResult *result);

// # Safety
// `result` must be valid.
double tentmle_result_grad_norm(const struct TentmleResult *result);

// 1 when the optimality certificate passed.
//
// # Safety
// `result` must be valid.
int32_t tentmle_result_converged(const struct TentmleResult *result);

// # Safety
// `result` must be valid.
uint64_t tentmle_result_iterations(const struct TentmleResult *result);

// Number of cells in the optimal subdivision.
//
// # Safety
// `result` must be valid.
size_t tentmle_result_num_cells(const struct TentmleResult *result);

// Number of vertex indices in cell `cell` (0-based cell position).
//
// # Safety
// `result` must be valid.
size_t tentmle_result_cell_len(const struct TentmleResult *result, size_t cell);

// Copy cell `cell`'s vertex indices (1-based) into `buf`.
//
// # Safety
// `buf` must point to at least `tentmle_result_cell_len` writable u32s.
enum TentmleStatus tentmle_result_cell(const struct TentmleResult *result,
                                       size_t cell,
                                       uint32_t *buf);

#endif  /* TENTMLE_H */
