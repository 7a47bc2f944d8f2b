/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef ISAT_H
#define ISAT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes. `ISAT_STATUS_OK` is zero; everything else is a failure.
 */
typedef enum IsatStatus {
  ISAT_STATUS_OK = 0,
  ISAT_STATUS_INVALID_PARAMETER = 1,
  ISAT_STATUS_PARSE = 2,
  ISAT_STATUS_INCOMPLETE_ASSIGNMENT = 3,
  ISAT_STATUS_IO = 4,
  ISAT_STATUS_DOMAIN = 5,
  ISAT_STATUS_TOO_LARGE = 6,
  ISAT_STATUS_BRACKET = 7,
  ISAT_STATUS_NULL_POINTER = 8,
  ISAT_STATUS_INVALID_UTF8 = 9,
  /**
   * The library panicked; this indicates a bug.
   */
  ISAT_STATUS_INTERNAL = 10,
} IsatStatus;

/**
 * A formula of interval-signed clauses.
 */
typedef struct IsatFormula IsatFormula;

/**
 * The outcome of a solver or decider run.
 */
typedef struct IsatResult IsatResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread. Owned by the library.
 */
const char *isat_last_error(void);

/**
 * Releases a string returned by this library.
 */
void isat_string_free(char *s);

/**
 * Random formula with `m` clauses of `k` distinct variables over `n`.
 */
enum IsatStatus isat_formula_generate(size_t n,
                                      size_t m,
                                      size_t k,
                                      uint64_t seed,
                                      struct IsatFormula **out);

/**
 * Parses the text format (`p isat n m` header, one clause per line).
 */
enum IsatStatus isat_formula_parse(const char *text, struct IsatFormula **out);

enum IsatStatus isat_formula_read_file(const char *path, struct IsatFormula **out);

/**
 * Text form of the formula; release with [`isat_string_free`].
 */
enum IsatStatus isat_formula_to_string(const struct IsatFormula *f, char **out);

/**
 * Number of variables, 0 for a null formula.
 */
size_t isat_formula_num_vars(const struct IsatFormula *f);

/**
 * Number of clauses, 0 for a null formula.
 */
size_t isat_formula_num_clauses(const struct IsatFormula *f);

void isat_formula_free(struct IsatFormula *f);

/**
 * Checks `len == num_vars` values against every clause.
 */
enum IsatStatus isat_verify(const struct IsatFormula *f,
                            const double *values,
                            size_t len,
                            bool *out_satisfied);

/**
 * Runs the solver with outer-loop constant `c_prime`.
 */
enum IsatStatus isat_solve(const struct IsatFormula *f,
                           double c_prime,
                           uint64_t seed,
                           struct IsatResult **out);

/**
 * Decides a formula whose clauses all have two literals.
 */
enum IsatStatus isat_decide2(const struct IsatFormula *f, struct IsatResult **out);

/**
 * Whether the run found a satisfying assignment; false for null.
 */
bool isat_result_is_sat(const struct IsatResult *r);

/**
 * Value of variable `var` (0-based) in a satisfying result.
 */
enum IsatStatus isat_result_value(const struct IsatResult *r, size_t var, double *out);

/**
 * Why the run gave up (`EmptyClause`, `FinalUnsat`, ...) or `Sat`.
 * Release with [`isat_string_free`].
 */
enum IsatStatus isat_result_outcome(const struct IsatResult *r, char **out);

/**
 * Solver statistics as JSON; `{}` for decider results.
 * Release with [`isat_string_free`].
 */
enum IsatStatus isat_result_stats_json(const struct IsatResult *r, char **out);

void isat_result_free(struct IsatResult *r);

/**
 * Largest density in `[lo, hi]` whose trajectory stays in the good region,
 * to within `tol`.
 */
enum IsatStatus isat_find_threshold(double eps, double lo, double hi, double tol, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISAT_H */
