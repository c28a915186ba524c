#ifndef LACUNARY_H
#define LACUNARY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LacunaryStatus {
  LACUNARY_STATUS_OK = 0,
  LACUNARY_STATUS_NULL_POINTER = 1,
  LACUNARY_STATUS_INVALID_UTF8 = 2,
  LACUNARY_STATUS_INVALID_PARAMETER = 3,
  LACUNARY_STATUS_TOWER_OVERFLOW = 4,
  LACUNARY_STATUS_PAIR_BUDGET_EXCEEDED = 5,
  LACUNARY_STATUS_NOT_INCREASING = 6,
  LACUNARY_STATUS_INVALID_CASE = 7,
  LACUNARY_STATUS_DEGENERATE_WEIGHTS = 8,
  LACUNARY_STATUS_WEIGHTS_NOT_NORMALIZED = 9,
  LACUNARY_STATUS_INDEX_OVERFLOW = 10,
  LACUNARY_STATUS_IO = 11,
  LACUNARY_STATUS_PANIC = 12,
} LacunaryStatus;

/*
 Tower rule for [`lacunary_sequence_paper`].
 */
typedef enum LacunaryTower {
  LACUNARY_TOWER_PAPER = 0,
  LACUNARY_TOWER_REDUCED = 1,
} LacunaryTower;

/*
 Opaque sequence handle.
 */
typedef struct LacunarySequence LacunarySequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static NUL-terminated string.
 */
const char *lacunary_version(void);

/*
 Message of the last failure on this thread, or NULL. Valid until the next
 failing call on the same thread.
 */
const char *lacunary_last_error_message(void);

/*
 Frees a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void lacunary_string_free(char *s);

/*
 `n_k = q^k`.

 # Safety
 `out` must be a valid pointer.
 */
enum LacunaryStatus lacunary_sequence_geometric(uint64_t q, struct LacunarySequence **out);

/*
 `n_k = 2^k − 1`.

 # Safety
 `out` must be a valid pointer.
 */
enum LacunaryStatus lacunary_sequence_erdos_fortet(struct LacunarySequence **out);

/*
 Block construction with growth base `r`, `ε = eps` (e.g. `"1/2"`), degree
 `d`, target constant `k` (e.g. `"1"`) and the given tower rule.

 # Safety
 `eps` and `k` must be NUL-terminated strings; `out` a valid pointer.
 */
enum LacunaryStatus lacunary_sequence_paper(uint64_t r,
                                            const char *eps,
                                            uint32_t d,
                                            const char *k,
                                            enum LacunaryTower tower,
                                            struct LacunarySequence **out);

/*
 # Safety
 `seq` must come from a constructor here and not have been freed; NULL is
 ignored.
 */
void lacunary_sequence_free(struct LacunarySequence *seq);

/*
 `n_k` as a decimal string; free with [`lacunary_string_free`].

 # Safety
 Pointers must be valid.
 */
enum LacunaryStatus lacunary_sequence_term(const struct LacunarySequence *seq,
                                           uint64_t k,
                                           char **out);

/*
 `L(N, a, b, c)` with `c` given in decimal.

 # Safety
 Pointers must be valid; `c` NUL-terminated.
 */
enum LacunaryStatus lacunary_count(const struct LacunarySequence *seq,
                                   uint64_t n,
                                   uint64_t a,
                                   uint64_t b,
                                   const char *c,
                                   uint64_t *out);

/*
 `max_{c ≥ 1} L(N, a, b, c)`; `out_c` receives the smallest maximizing
 `c` in decimal, or NULL when no `c ≥ 1` has a solution.

 # Safety
 Pointers must be valid.
 */
enum LacunaryStatus lacunary_max_count(const struct LacunarySequence *seq,
                                       uint64_t n,
                                       uint64_t a,
                                       uint64_t b,
                                       uint64_t *out_count,
                                       char **out_c);

/*
 `Σ_{k≤N} f(n_k x)` at `x = x_numerator / 2^precision`; `f` is one of
 `"poly:D"`, `"erdos-fortet"`, `"cos:F"`, `"sin:F"`.

 # Safety
 Pointers must be valid; strings NUL-terminated.
 */
enum LacunaryStatus lacunary_sum_at(const struct LacunarySequence *seq,
                                    const char *f,
                                    uint64_t n,
                                    const char *x_numerator,
                                    uint64_t precision,
                                    double *out);

/*
 `σ_N²` as an exact rational `"p/q"` (or `"p"`).

 # Safety
 Pointers must be valid.
 */
enum LacunaryStatus lacunary_sigma_squared(const struct LacunarySequence *seq,
                                           const char *f,
                                           uint64_t n,
                                           char **out);

/*
 Residual of the Erdős–Fortet factorization at `x`.

 # Safety
 Pointers must be valid.
 */
enum LacunaryStatus lacunary_erdos_fortet_residual(uint64_t n,
                                                   const char *x_numerator,
                                                   uint64_t precision,
                                                   double *out);

/*
 Runs the CLT experiment and returns its report as JSON.

 # Safety
 Pointers must be valid.
 */
enum LacunaryStatus lacunary_clt_report_json(const struct LacunarySequence *seq,
                                             const char *f,
                                             uint64_t n,
                                             uint64_t m,
                                             uint64_t seed,
                                             char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LACUNARY_H */
