#ifndef GCFX_H
#define GCFX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GcfxStatus {
  GCFX_STATUS_OK = 0,
  GCFX_STATUS_NULL_POINTER = 1,
  GCFX_STATUS_INVALID_ARGUMENT = 2,
  GCFX_STATUS_CONDITION_VIOLATED = 3,
  GCFX_STATUS_NON_CONVERGENCE = 4,
  GCFX_STATUS_RESOURCE_EXHAUSTED = 5,
  GCFX_STATUS_PANIC = 6,
} GcfxStatus;

/**
 * Opaque truncated construction with prescribed exponent.
 */
typedef struct GcfxPlan GcfxPlan;

/**
 * Opaque coefficient stream.
 */
typedef struct GcfxStream GcfxStream;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *gcfx_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *gcfx_last_error(void);

/**
 * # Safety
 * `s` is null or was returned by this library and not yet freed.
 */
void gcfx_string_free(char *s);

/**
 * Stream `b0 + K a_n / b_n` whose coefficients repeat with periods
 * `a_len` and `b_len`.
 *
 * # Safety
 * `a` and `b` point to `a_len` and `b_len` readable values; `out` is writable.
 */
enum GcfxStatus gcfx_stream_periodic(uint64_t b0,
                                     const uint64_t *a,
                                     size_t a_len,
                                     const uint64_t *b,
                                     size_t b_len,
                                     struct GcfxStream **out);

/**
 * Stream of a registered family; `params` may be null.
 *
 * # Safety
 * `name` and `params` are null or NUL-terminated; `out` is writable.
 */
enum GcfxStatus gcfx_stream_family(const char *name, const char *params, struct GcfxStream **out);

/**
 * # Safety
 * `s` is null or a live stream handle.
 */
void gcfx_stream_free(struct GcfxStream *s);

/**
 * Enclosure of the value to width `precision` (decimal text), as JSON.
 * Family streams are evaluated through their outer map.
 *
 * # Safety
 * `s` is a live handle, `precision` NUL-terminated, `out_json` writable.
 */
enum GcfxStatus gcfx_stream_evaluate_json(const struct GcfxStream *s,
                                          const char *precision,
                                          size_t max_terms,
                                          char **out_json);

/**
 * Unreduced convergent `A_n / B_n` of the coefficient stream, as decimal
 * strings.
 *
 * # Safety
 * `s` is a live handle; `out_num` and `out_den` are writable.
 */
enum GcfxStatus gcfx_stream_convergent(const struct GcfxStream *s,
                                       size_t n,
                                       char **out_num,
                                       char **out_den);

/**
 * Empirical `max log Π_n / log B_n` over the trailing window up to `n_max`.
 *
 * # Safety
 * `s` is a live handle; `out_nu` is writable.
 */
enum GcfxStatus gcfx_stream_nu_estimate(const struct GcfxStream *s,
                                        size_t n_max,
                                        size_t exact_until,
                                        double *out_nu);

/**
 * `2 + ν/(1 − ν)` for `0 ≤ ν < 1`.
 *
 * # Safety
 * `out_mu` is writable.
 */
enum GcfxStatus gcfx_lemma_bound(double nu, double *out_mu);

/**
 * Bound for coefficients with `α₁ ≤ a_n ≤ α₂`, `β₁ ≤ b_n ≤ β₂`.
 * Returns `ConditionViolated` when the growth condition fails.
 *
 * # Safety
 * `out_mu` is writable.
 */
enum GcfxStatus gcfx_bounded_bound(uint64_t alpha1,
                                   uint64_t alpha2,
                                   uint64_t beta1,
                                   uint64_t beta2,
                                   double *out_mu);

/**
 * Primary bound report of a family, as JSON. The report is written even
 * when a condition fails, in which case the status is `ConditionViolated`.
 *
 * # Safety
 * `name` NUL-terminated, `params` null or NUL-terminated, `out_json` writable.
 */
enum GcfxStatus gcfx_family_bound_json(const char *name, const char *params, char **out_json);

/**
 * Construction with exponent `s` (rational text or `inf`) over `blocks`
 * blocks.
 *
 * # Safety
 * `exponent` NUL-terminated; `out` writable.
 */
enum GcfxStatus gcfx_plan_new(const char *exponent, size_t blocks, struct GcfxPlan **out);

/**
 * # Safety
 * `p` is a live plan; `out_json` writable.
 */
enum GcfxStatus gcfx_plan_json(const struct GcfxPlan *p, char **out_json);

/**
 * Audit of the simple convergent at `n ≡ 1 (mod 4)`, as JSON.
 *
 * # Safety
 * `p` is a live plan; `out_json` writable.
 */
enum GcfxStatus gcfx_plan_audit_json(const struct GcfxPlan *p, size_t n, char **out_json);

/**
 * # Safety
 * `p` is null or a live plan.
 */
void gcfx_plan_free(struct GcfxPlan *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GCFX_H */
