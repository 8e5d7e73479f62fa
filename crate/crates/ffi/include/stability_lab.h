#ifndef STABILITY_LAB_H
#define STABILITY_LAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_UTF8 = 2,
  SL_STATUS_PARSE = 3,
  SL_STATUS_INVALID_INPUT = 4,
  SL_STATUS_TOO_LARGE = 5,
  SL_STATUS_NUMERICAL = 6,
  SL_STATUS_NOT_AVAILABLE = 7,
  SL_STATUS_PANIC = 8,
} SlStatus;

/**
 * A direct sum of stable bundles.
 */
typedef struct SlBundle SlBundle;

/**
 * Test-configuration invariants.
 */
typedef struct SlConfig SlConfig;

/**
 * A circle-invariant metric on the projective line.
 */
typedef struct SlMetric SlMetric;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. Owned by the
 * library and valid until the next call on this thread.
 */
const char *sl_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void sl_string_free(char *s);

/**
 * Parses `{"pieces": [{"rank": r, "degree": d, "multiplicity": m}, …]}`.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum SlStatus sl_bundle_from_json(const char *json, struct SlBundle **out);

/**
 * # Safety
 * `b` must be null or a handle from [`sl_bundle_from_json`] not yet freed.
 */
void sl_bundle_free(struct SlBundle *b);

/**
 * Writes Φ² of the Harder–Narasimhan flag as a `"num/den"` string.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_bundle_phi_squared(const struct SlBundle *b, char **out);

/**
 * Number of quotients in the Harder–Narasimhan flag.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_bundle_hn_length(const struct SlBundle *b, size_t *out);

/**
 * Runs the exhaustive search over flags and weights in `[-bound, bound]`
 * (`bound <= 0` selects a sufficient bound) and reports whether its maximum
 * equals Φ of the Harder–Narasimhan flag.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_bundle_verify(const struct SlBundle *b, int64_t bound, bool *out);

/**
 * Builds invariants from a weight-spectrum JSON document, fitting `N_p^p`
 * for each even `p` in `p_list`.
 *
 * # Safety
 * `json` must be a nul-terminated string, `p_list` must hold `p_len`
 * values, and `out` must be writable.
 */
enum SlStatus sl_config_from_spectrum_json(const char *json,
                                           const uint32_t *p_list,
                                           size_t p_len,
                                           struct SlConfig **out);

/**
 * Builds invariants from `{"polytope": …, "function": …}` using the lattice
 * sums for `k` in `k_min..=k_max`.
 *
 * # Safety
 * As for [`sl_config_from_spectrum_json`].
 */
enum SlStatus sl_config_from_toric_json(const char *json,
                                        int64_t k_min,
                                        int64_t k_max,
                                        const uint32_t *p_list,
                                        size_t p_len,
                                        struct SlConfig **out);

/**
 * # Safety
 * `c` must be null or a handle from an `sl_config_from_*` call not yet freed.
 */
void sl_config_free(struct SlConfig *c);

/**
 * Exact invariant by name: `a0`, `a1`, `b0`, `b1`, `Q`, `futaki`, `N2^2`,
 * or `Np^p` for a fitted even `p`.
 *
 * # Safety
 * `c` must be a live handle, `name` a nul-terminated string, `out` writable.
 */
enum SlStatus sl_config_get(const struct SlConfig *c, const char *name, char **out);

/**
 * Ψ̂_p as a double, for a fitted even `p` with `N_p > 0`.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_config_psi_hat(const struct SlConfig *c, uint32_t p, double *out);

/**
 * The round metric (`epsilon = 0`) or its perturbation by
 * `epsilon·x²(1−x)²`, `|epsilon| <= 1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SlStatus sl_metric_new(double epsilon, struct SlMetric **out);

/**
 * # Safety
 * `m` must be null or a handle from [`sl_metric_new`] not yet freed.
 */
void sl_metric_free(struct SlMetric *m);

/**
 * `sup |η_k − S|` for the Bergman density of states at level `k`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_metric_density_error(const struct SlMetric *m, uint32_t k, double *out);

/**
 * Schatten q-norm of the trace-free moment matrix at level `k`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_metric_moment_norm(const struct SlMetric *m, uint32_t k, double q, double *out);

/**
 * `‖S − Ŝ‖_{L^q}` and the Hölder quotient for exponent `p` (q conjugate).
 *
 * # Safety
 * `m` must be a live handle; `lhs` and `rhs` must be writable.
 */
enum SlStatus sl_metric_holder(const struct SlMetric *m, double p, double *lhs, double *rhs);

/**
 * Chow weight `FCh` of a named conic degeneration
 * (`conic-a`, `conic-b`, `conic-trivial`).
 *
 * # Safety
 * `name` must be a nul-terminated string; `out` must be writable.
 */
enum SlStatus sl_conic_fch(const char *name, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STABILITY_LAB_H */
