#ifndef LOCCLAB_H
#define LOCCLAB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum LocclabStatus {
  LOCCLAB_STATUS_OK = 0,
  LOCCLAB_STATUS_NULL_POINTER = 1,
  LOCCLAB_STATUS_INVALID_UTF8 = 2,
  LOCCLAB_STATUS_LAYOUT = 3,
  LOCCLAB_STATUS_NUMERIC = 4,
  LOCCLAB_STATUS_SPEC = 5,
  LOCCLAB_STATUS_CHANNEL = 6,
  LOCCLAB_STATUS_CONFIG = 7,
  LOCCLAB_STATUS_SOLVER = 8,
  LOCCLAB_STATUS_RESOURCE = 9,
  LOCCLAB_STATUS_MODE = 10,
  LOCCLAB_STATUS_CATALYST_VIOLATION = 11,
  LOCCLAB_STATUS_DOMAIN = 12,
  LOCCLAB_STATUS_PARSE = 13,
  LOCCLAB_STATUS_INVARIANT = 14,
  LOCCLAB_STATUS_IO = 15,
  LOCCLAB_STATUS_PANIC = 16,
} LocclabStatus;

// Opaque pair of density operators (ρ₀, ρ₁) on a common layout.
typedef struct LocclabStatePair LocclabStatePair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *locclab_version(void);

// Copy of the last error message on this thread, or NULL if none. Free with
// `locclab_string_free`.
char *locclab_last_error_message(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void locclab_string_free(char *s);

// Werner-projector hiding pair σ₀, σ₁ of local dimension `d`.
//
// # Safety
// `out` must be a valid pointer.
enum LocclabStatus locclab_werner_pair(size_t d, struct LocclabStatePair **out);

// ρᵢ = σᵢ ⊗ ψ(λ, d₂).
//
// # Safety
// `out` must be a valid pointer.
enum LocclabStatus locclab_rho_pair(size_t d,
                                    double lambda,
                                    size_t d2,
                                    struct LocclabStatePair **out);

// Pair parsed from two operator JSON documents.
//
// # Safety
// `rho0_json`, `rho1_json` must be NUL-terminated strings; `out` valid.
enum LocclabStatus locclab_pair_from_json(const char *rho0_json,
                                          const char *rho1_json,
                                          struct LocclabStatePair **out);

// Total Hilbert-space dimension of the pair.
//
// # Safety
// `pair` and `out` must be valid pointers.
enum LocclabStatus locclab_pair_dim(const struct LocclabStatePair *pair, size_t *out);

// Releases a pair. NULL is ignored.
//
// # Safety
// `pair` must come from this library and not be freed twice.
void locclab_pair_free(struct LocclabStatePair *pair);

// Optimal global success probability.
//
// # Safety
// `pair` and `out` must be valid pointers.
enum LocclabStatus locclab_helstrom(const struct LocclabStatePair *pair, double *out);

// Certified PPT upper bound on the LOCC success probability.
//
// # Safety
// `pair` and `out` must be valid pointers.
enum LocclabStatus locclab_ppt_upper(const struct LocclabStatePair *pair, double *out);

// Best one-way LOCC success probability over the default strategy library.
//
// # Safety
// `pair` and `out` must be valid pointers.
enum LocclabStatus locclab_locc_lower(const struct LocclabStatePair *pair, double *out);

// ε + (1 + ε′)/2.
//
// # Safety
// `out` must be a valid pointer.
enum LocclabStatus locclab_thm2_bound(double eps, double eps_prime, double *out);

// Smallest number of detection rounds for threshold `delta` and trace
// distance `trace_distance`.
//
// # Safety
// `out` must be a valid pointer.
enum LocclabStatus locclab_min_rounds(double delta, double trace_distance, uint64_t *out);

// Pr[log₂ dim ≥ target] for the type measurement on n copies of ψ(λ, d₂).
// Exact when feasible, otherwise estimated from `samples` draws.
//
// # Safety
// `out` must be a valid pointer.
enum LocclabStatus locclab_concentration_success(double lambda,
                                                 size_t d2,
                                                 size_t n,
                                                 double target,
                                                 size_t samples,
                                                 uint64_t seed,
                                                 double *out);

// Runs an experiment config (JSON text) and returns its summary as JSON.
// Artifacts are written when the config names an output directory.
//
// # Safety
// `config_json` must be a NUL-terminated string; `summary_out` valid. The
// returned string must be freed with `locclab_string_free`.
enum LocclabStatus locclab_run_config(const char *config_json, size_t threads, char **summary_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCCLAB_H */
