#ifndef FRACVAR_H
#define FRACVAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FvBackend {
  FV_BACKEND_QUADRATURE = 0,
  FV_BACKEND_SPECTRAL = 1,
} FvBackend;

typedef enum FvStatus {
  FV_STATUS_OK = 0,
  FV_STATUS_NULL_POINTER = 1,
  FV_STATUS_INVALID_PARAMETER = 2,
  FV_STATUS_SUPPORT_VIOLATION = 3,
  FV_STATUS_NON_FINITE = 4,
  FV_STATUS_GRID_MISMATCH = 5,
  FV_STATUS_ODD_GRID = 6,
  FV_STATUS_UNSUPPORTED_DIMENSION = 7,
  FV_STATUS_INVALID_MINOR = 8,
  FV_STATUS_NON_FINITE_ENERGY = 9,
  FV_STATUS_FORMAT = 10,
  FV_STATUS_CONFIG = 11,
  FV_STATUS_IO = 12,
  FV_STATUS_BUFFER_TOO_SMALL = 13,
  FV_STATUS_INVALID_UTF8 = 14,
  FV_STATUS_PANIC = 15,
} FvStatus;

typedef enum FvTermination {
  FV_TERMINATION_CONVERGED = 0,
  FV_TERMINATION_MAX_ITERATIONS = 1,
  FV_TERMINATION_LINE_SEARCH_FAILURE = 2,
} FvTermination;

// Fractional gradient and divergence on a fixed grid.
typedef struct FvOperator FvOperator;

// Minimizer and report of a solver run.
typedef struct FvSolution FvSolution;

// Scalar results of a solver run.
typedef struct FvSolveSummary {
  size_t iterations;
  double final_energy;
  double final_gradient;
  double tol_g;
  double el_residual;
  double wall_time_s;
  enum FvTermination termination;
} FvSolveSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` as a
// NUL-terminated string, truncating if needed. Returns the full message
// length in bytes, excluding the terminator.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t fv_last_error_message(char *buf, size_t len);

// Creates an operator for dimension `n`, order `s`, integrability `p` on
// the grid `[-extent, extent]^n` with `points` nodes per axis.
//
// # Safety
// `out` must be valid for one pointer write.
enum FvStatus fv_operator_new(size_t n,
                              double s,
                              double p,
                              double extent,
                              size_t points,
                              enum FvBackend backend,
                              struct FvOperator **out);

// # Safety
// `op` must be null or a handle from [`fv_operator_new`] not yet freed.
void fv_operator_free(struct FvOperator *op);

// Number of grid nodes, `points^n`.
//
// # Safety
// `op` must be a live handle and `out` valid for one write.
enum FvStatus fv_operator_num_nodes(const struct FvOperator *op, size_t *out);

// Fractional gradient of a scalar field with `num_nodes` samples in
// row-major order. Writes `n * num_nodes` values, node-major.
//
// # Safety
// `u` must be valid for `u_len` reads and `out` for `out_len` writes.
enum FvStatus fv_ds_grad(const struct FvOperator *op,
                         const double *u,
                         size_t u_len,
                         double *out,
                         size_t out_len);

// Fractional divergence of a vector field with `n * num_nodes` samples,
// node-major. Writes `num_nodes` values.
//
// # Safety
// `phi` must be valid for `phi_len` reads and `out` for `out_len` writes.
enum FvStatus fv_ds_div(const struct FvOperator *op,
                        const double *phi,
                        size_t phi_len,
                        double *out,
                        size_t out_len);

// Minimizes the problem described by a TOML configuration, starting from
// the complement datum.
//
// # Safety
// `config` must be a NUL-terminated string and `out` valid for one write.
enum FvStatus fv_solve_config(const char *config, struct FvSolution **out);

// # Safety
// `sol` must be null or a handle from [`fv_solve_config`] not yet freed.
void fv_solution_free(struct FvSolution *sol);

// # Safety
// `sol` must be a live handle and `out` valid for one write.
enum FvStatus fv_solution_summary(const struct FvSolution *sol, struct FvSolveSummary *out);

// Number of samples in the minimizer, `n * num_nodes`.
//
// # Safety
// `sol` must be a live handle and `out` valid for one write.
enum FvStatus fv_solution_len(const struct FvSolution *sol, size_t *out);

// Copies the minimizer, node-major.
//
// # Safety
// `sol` must be a live handle and `out` valid for `out_len` writes.
enum FvStatus fv_solution_values(const struct FvSolution *sol, double *out, size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACVAR_H */
