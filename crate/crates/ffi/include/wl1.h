#ifndef WL1_H
#define WL1_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Wl1Status {
  WL1_STATUS_OK = 0,
  WL1_STATUS_NULL_POINTER = 1,
  WL1_STATUS_DIMENSION = 2,
  WL1_STATUS_INVALID_ARGUMENT = 3,
  WL1_STATUS_NON_FINITE = 4,
  WL1_STATUS_INDEX_OUT_OF_RANGE = 5,
  WL1_STATUS_TRIVIAL_KERNEL = 6,
  WL1_STATUS_ENUMERATION_CAP = 7,
  WL1_STATUS_INFEASIBLE = 8,
  WL1_STATUS_PARSE = 9,
  WL1_STATUS_IO = 10,
  WL1_STATUS_INTERNAL = 11,
  /**
   * The solver hit its inner iteration cap in some stage. The output is
   * still written.
   */
  WL1_STATUS_NOT_CONVERGED = 12,
  WL1_STATUS_PANIC = 13,
} Wl1Status;

typedef enum Wl1Scheme {
  WL1_SCHEME_IDENTITY = 0,
  WL1_SCHEME_CLASSIC = 1,
  WL1_SCHEME_NULLSPACE_GUIDED = 2,
  WL1_SCHEME_FIXED = 3,
} Wl1Scheme;

/**
 * Opaque dense matrix.
 */
typedef struct Wl1Matrix Wl1Matrix;

typedef struct Wl1NspResult {
  bool holds;
  /**
   * The kernel is trivial, so the property holds without any vertex to check.
   */
  bool vacuous;
  /**
   * Largest top-k mass over section vertices minus one half.
   */
  double worst_margin;
} Wl1NspResult;

typedef struct Wl1T0Result {
  double value;
  double second_value;
  bool unique;
} Wl1T0Result;

typedef struct Wl1GammaInterval {
  double lo;
  double hi_wnsp;
  /**
   * NaN when no RIC budget was supplied.
   */
  double hi_ric;
  bool feasible;
} Wl1GammaInterval;

/**
 * Plain-data subset of the solver settings. The initial point is all ones.
 */
typedef struct Wl1SolverConfig {
  size_t stages;
  double mu_decay;
  double eta_factor;
  size_t inner_cap;
  double l_inflation;
} Wl1SolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes) and returns the full message length in bytes
 * excluding the terminator. `buf` may be null to query the length.
 */
size_t wl1_last_error_message(char *buf, size_t len);

/**
 * Builds a matrix from `rows * cols` row-major entries.
 */
enum Wl1Status wl1_matrix_new(size_t rows, size_t cols, const double *data, struct Wl1Matrix **out);

/**
 * Reads a whitespace-separated matrix file (first line `rows cols`, `#` comments).
 */
enum Wl1Status wl1_matrix_read(const char *path, struct Wl1Matrix **out);

/**
 * Releases a matrix. Null is ignored.
 */
void wl1_matrix_free(struct Wl1Matrix *m);

/**
 * Row count, or 0 for a null handle.
 */
size_t wl1_matrix_rows(const struct Wl1Matrix *m);

/**
 * Column count, or 0 for a null handle.
 */
size_t wl1_matrix_cols(const struct Wl1Matrix *m);

/**
 * Exact restricted isometry constant of order `k`. When `out_set` is non-null
 * it receives the `k` 0-based column indices attaining the value.
 */
enum Wl1Status wl1_ric(const struct Wl1Matrix *m,
                       size_t k,
                       uint64_t cap,
                       double *out_value,
                       size_t *out_set,
                       size_t set_len);

/**
 * Exact restricted orthogonality constant of orders `(k1, k2)`.
 */
enum Wl1Status wl1_roc(const struct Wl1Matrix *m,
                       size_t k1,
                       size_t k2,
                       uint64_t cap,
                       double *out_value);

/**
 * Null space property of order `k`, weighted when `weights` is non-null
 * (`cols` entries in (0, 1]). When `out_witness` is non-null and the property
 * fails it receives the violating unit-ℓ1 kernel vector (`cols` entries);
 * otherwise it is zero-filled.
 */
enum Wl1Status wl1_check_nsp(const struct Wl1Matrix *m,
                             const double *weights,
                             size_t k,
                             struct Wl1NspResult *out,
                             double *out_witness,
                             size_t witness_len);

/**
 * Maximal concentration set `T₀` of size `k` over unit-ℓ1 kernel vectors.
 * `out_set` (nullable) receives its `k` 0-based indices.
 */
enum Wl1Status wl1_t0(const struct Wl1Matrix *m,
                      size_t k,
                      struct Wl1T0Result *out,
                      size_t *out_set,
                      size_t set_len);

/**
 * Admissible down-weights on `T₀`. Pass `ric_a <= 0` to skip the RIC route;
 * otherwise `ric_delta` is a measured `δ_{ak}`.
 */
enum Wl1Status wl1_gamma_interval(const struct Wl1Matrix *m,
                                  size_t k,
                                  double ric_a,
                                  double ric_delta,
                                  struct Wl1GammaInterval *out);

/**
 * Exact weighted ℓ1 minimizer subject to `Φx = b` by linear programming.
 * A null `weights` means all ones.
 */
enum Wl1Status wl1_l1_min_exact(const struct Wl1Matrix *m,
                                const double *b,
                                size_t b_len,
                                const double *weights,
                                double *out_x,
                                size_t x_len);

struct Wl1SolverConfig wl1_solver_config_default(void);

/**
 * Continuation solver. `scheme` is a `Wl1Scheme` value. `q` and `eps` apply to the classic and null-space-guided
 * schemes; `weights` (`cols` entries) to the fixed scheme only. A null
 * `config` uses the defaults. Returns `WL1_STATUS_NOT_CONVERGED` with `out_x`
 * filled when some stage hit its iteration cap.
 */
enum Wl1Status wl1_solve(const struct Wl1Matrix *m,
                         const double *b,
                         size_t b_len,
                         int32_t scheme,
                         double q,
                         double eps,
                         const double *weights,
                         const struct Wl1SolverConfig *config,
                         double *out_x,
                         size_t x_len);

/**
 * Largest `δ_{ak}` that still guarantees weighted recovery with down-weight `γ`.
 */
enum Wl1Status wl1_weighted_ric_bound(double a, double gamma, double *out);

/**
 * Largest `δ_k` that still guarantees weighted recovery of order `k` with down-weight `γ`.
 */
enum Wl1Status wl1_weighted_ric_bound_order_k(size_t k, double gamma, double *out);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wl1_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WL1_H */
