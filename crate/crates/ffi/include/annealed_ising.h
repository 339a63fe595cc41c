#ifndef ANNEALED_ISING_H
#define ANNEALED_ISING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define AI_OK 0

#define AI_ERR_NULL 1

#define AI_ERR_DOMAIN 2

#define AI_ERR_PARITY 3

#define AI_ERR_SIZE 4

#define AI_ERR_UNDEFINED 5

#define AI_ERR_NUMERIC 6

#define AI_ERR_IO 7

#define AI_ERR_PANIC 8

// Finite-`n` weights `log x_j`, `j = 0..=n`, for fixed `(d, n, β)`.
typedef struct AiWeightTable AiWeightTable;

// Limit quantities at one `(d, β, B)`; `has_specific_heat` is 0 at `(β_c, 0)`.
typedef struct AiThermoPoint {
  double psi;
  double magnetization;
  double susceptibility;
  double specific_heat;
  int has_specific_heat;
  double t_star;
} AiThermoPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *ai_last_error_message(void);

// `β_c = atanh(1/(d−1))`; infinite for `d = 2`.
//
// # Safety
// `out` must be valid for writes.
int ai_critical_beta(uint32_t d, double *out);

// Limit pressure `ψ(β, B)`.
//
// # Safety
// `out` must be valid for writes.
int ai_pressure(uint32_t d, double beta, double field, double *out);

// # Safety
// `out` must be valid for writes.
int ai_magnetization(uint32_t d, double beta, double field, double *out);

// # Safety
// `out` must be valid for writes.
int ai_susceptibility(uint32_t d, double beta, double field, double *out);

// `AI_ERR_UNDEFINED` at `(β_c, 0)`.
//
// # Safety
// `out` must be valid for writes.
int ai_specific_heat(uint32_t d, double beta, double field, double *out);

// # Safety
// `out` must be valid for writes.
int ai_thermo_point(uint32_t d, double beta, double field, struct AiThermoPoint *out);

// `log P(X(k, m) = x)`; `-inf` off the support.
//
// # Safety
// `out` must be valid for writes.
int ai_cross_count_log_prob(size_t k, size_t m, size_t x, double *out);

// Builds the table for `(d, n, β)`. `cache_dir` may be null; otherwise tables
// are read from and written to that directory.
//
// # Safety
// `out` must be valid for writes; `cache_dir` must be null or a NUL-terminated string.
int ai_weight_table_new(uint32_t d,
                        size_t n,
                        double beta,
                        const char *cache_dir,
                        struct AiWeightTable **out);

// Releases a table; null is ignored.
//
// # Safety
// `table` must be null or come from [`ai_weight_table_new`] and not be used afterwards.
void ai_weight_table_free(struct AiWeightTable *table);

// Number of vertices `n`; 0 for null.
//
// # Safety
// `table` must be null or a live handle.
size_t ai_weight_table_n(const struct AiWeightTable *table);

// Copies `log x_j` into `buf`, which must hold `n + 1` values.
//
// # Safety
// `table` must be a live handle and `buf` valid for `len` writes.
int ai_weight_table_log_weights(const struct AiWeightTable *table, double *buf, size_t len);

// `ψ_n(β, B)`.
//
// # Safety
// `table` must be a live handle and `out` valid for writes.
int ai_finite_pressure(const struct AiWeightTable *table, double field, double *out);

// `M_n = E[S_n]/n`.
//
// # Safety
// `table` must be a live handle and `out` valid for writes.
int ai_finite_magnetization(const struct AiWeightTable *table, double field, double *out);

// `χ_n = Var(S_n)/n`.
//
// # Safety
// `table` must be a live handle and `out` valid for writes.
int ai_finite_susceptibility(const struct AiWeightTable *table, double field, double *out);

// `E[exp(r S_n / n^{3/4})]` at `B = 0`, for `|r| ≤ 10`.
//
// # Safety
// `table` must be a live handle and `out` valid for writes.
int ai_mgf_scaled(const struct AiWeightTable *table, double r, double *out);

// Raw moment `E[S_n^k]`.
//
// # Safety
// `table` must be a live handle and `out` valid for writes.
int ai_spin_moment(const struct AiWeightTable *table, double field, int k, double *out);

// Scaled moment `E[(S_n / n^scale)^k]`.
//
// # Safety
// `table` must be a live handle and `out` valid for writes.
int ai_spin_scaled_moment(const struct AiWeightTable *table,
                          double field,
                          int k,
                          double scale,
                          double *out);

// Probabilities `P(j up-spins)`, `j = 0..=n`, into `buf` of at least `n + 1` values.
//
// # Safety
// `table` must be a live handle and `buf` valid for `len` writes.
int ai_spin_law_masses(const struct AiWeightTable *table, double field, double *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANNEALED_ISING_H */
