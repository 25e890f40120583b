#ifndef INTERGROW_H
#define INTERGROW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IgStatus {
  IG_STATUS_OK = 0,
  IG_STATUS_NULL_POINTER = 1,
  IG_STATUS_INVALID_UTF8 = 2,
  IG_STATUS_DOMAIN = 3,
  IG_STATUS_PRECISION = 4,
  IG_STATUS_RANGE = 5,
  IG_STATUS_INPUT = 6,
  IG_STATUS_BUDGET = 7,
  IG_STATUS_UNSUPPORTED = 8,
  IG_STATUS_IO = 9,
  IG_STATUS_JSON = 10,
  IG_STATUS_PANIC = 11,
} IgStatus;

/**
 * Opaque `sum_j alpha_j G(x + h_j)`.
 */
typedef struct IgCombination IgCombination;

/**
 * Result of `ig_partial_sum`.
 */
typedef struct IgSum {
  double re;
  double im;
  /**
   * `|sum| / N`.
   */
  double normalized;
  uint32_t precision_bits;
} IgSum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next call.
 */
const char *ig_last_error(void);

/**
 * Library version as a static string.
 */
const char *ig_version(void);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ig_string_free(char *s);

/**
 * Build a combination from `len` shifts and coefficient strings
 * (integers, `p/q`, decimals or expressions such as `sqrt(2)-1`).
 *
 * # Safety
 * `shifts` and `alphas` must point to `len` valid elements; `out` must be
 * writable.
 */
enum IgStatus ig_combination_new(double c,
                                 const int64_t *shifts,
                                 const char *const *alphas,
                                 size_t len,
                                 struct IgCombination **out);

/**
 * # Safety
 * `h` must come from `ig_combination_new` and not be freed twice.
 */
void ig_combination_free(struct IgCombination *h);

/**
 * `sum_{n<=N} e(F(n))`, or the floor-phase sum when `floor` is nonzero.
 * `precision_bits = 0` picks the precision automatically; `threads = 0`
 * uses every core.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum IgStatus ig_partial_sum(const struct IgCombination *h,
                             uint64_t n,
                             int32_t floor,
                             uint32_t precision_bits,
                             uint32_t threads,
                             struct IgSum *out);

/**
 * The difference-polynomial form of a combination as a JSON object with
 * `coefficients`, `tau` and `d_tau`.
 *
 * # Safety
 * `h` must be a live handle and `json` writable.
 */
enum IgStatus ig_change_of_basis(const struct IgCombination *h, char **json);

/**
 * Fractional part of `G(m)` at `precision_bits` (0 for automatic).
 *
 * # Safety
 * `frac` must be writable.
 */
enum IgStatus ig_growth_frac(uint64_t m, double c, uint32_t precision_bits, double *frac);

/**
 * Run a command-line subcommand (`"expsum"`, `"certify"`, ...) on a JSON
 * configuration with the command line's field names. The report text is
 * written to `*report` (CSV or JSON as the command would print it) and
 * `*passed` is 1 when the command's criterion holds.
 *
 * # Safety
 * Strings must be NUL-terminated; `report` and `passed` writable.
 */
enum IgStatus ig_run(const char *command, const char *config_json, char **report, int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INTERGROW_H */
