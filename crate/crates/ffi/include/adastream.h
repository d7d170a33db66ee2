#ifndef ADASTREAM_H
#define ADASTREAM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AdsFamily {
  ADS_FAMILY_COVERAGE = 0,
  ADS_FAMILY_VIRAL = 1,
  ADS_FAMILY_VERSIONSPACE = 2,
  ADS_FAMILY_TABLE_RANDOM = 3,
} AdsFamily;

typedef enum AdsPolicy {
  ADS_POLICY_THRESHOLD_UNIFORM = 0,
  ADS_POLICY_THRESHOLD_KNAPSACK = 1,
  ADS_POLICY_THRESHOLD_KNAPSACK_PLUS = 2,
  ADS_POLICY_MIXED_SINGLETON = 3,
  ADS_POLICY_POOL_GREEDY = 4,
  ADS_POLICY_POOL_DENSITY_GREEDY = 5,
  ADS_POLICY_BEST_SINGLETON = 6,
  ADS_POLICY_ORACLE = 7,
} AdsPolicy;

typedef enum AdsStatus {
  ADS_STATUS_OK = 0,
  /**
   * A required pointer was null or a string was not UTF-8.
   */
  ADS_STATUS_NULL_OR_INVALID_ARGUMENT = 1,
  /**
   * Bad configuration: unknown names, invalid `(α, β)`, unreadable files.
   */
  ADS_STATUS_CONFIG = 2,
  /**
   * A state-space, order or generator cap was exceeded.
   */
  ADS_STATUS_CAP_EXCEEDED = 3,
  /**
   * The instance or request violates a model invariant.
   */
  ADS_STATUS_MODEL = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  ADS_STATUS_INTERNAL = 5,
} AdsStatus;

typedef enum AdsVMode {
  ADS_V_MODE_GREEDY = 0,
  ADS_V_MODE_DENSITY_GREEDY = 1,
  ADS_V_MODE_EXACT = 2,
} AdsVMode;

/**
 * Opaque instance handle.
 */
typedef struct AdsInstance AdsInstance;

/**
 * Result of the four property checkers.
 */
typedef struct AdsProperties {
  bool adaptive_monotone;
  bool adaptive_submodular;
  bool semi_policywise;
  bool policywise;
} AdsProperties;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *ads_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void ads_string_free(char *s);

/**
 * Parses an instance document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AdsStatus ads_instance_from_json(const char *json, struct AdsInstance **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum AdsStatus ads_instance_load(const char *path, struct AdsInstance **out);

/**
 * Generates a unit-cost instance from a family.
 *
 * # Safety
 * `out` must be writable.
 */
enum AdsStatus ads_instance_generate(enum AdsFamily family,
                                     size_t n,
                                     size_t num_states,
                                     double budget,
                                     uint64_t seed,
                                     struct AdsInstance **out);

/**
 * # Safety
 * `inst` must be null or a handle from this library, not yet freed.
 */
void ads_instance_free(struct AdsInstance *inst);

/**
 * Number of items, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t ads_instance_num_items(const struct AdsInstance *inst);

/**
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum AdsStatus ads_instance_to_json(const struct AdsInstance *inst, char **out);

/**
 * Hex SHA-256 of the canonical instance document.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum AdsStatus ads_instance_hash(const struct AdsInstance *inst, char **out);

/**
 * Expected utility of the optimal pool-based policy.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum AdsStatus ads_optimal_value(const struct AdsInstance *inst, double *out);

/**
 * Offline estimate of `v` with its certified `(α, β)`.
 *
 * # Safety
 * `inst` must be a live handle; the three outputs must be writable.
 */
enum AdsStatus ads_estimate_v(const struct AdsInstance *inst,
                              enum AdsVMode mode,
                              double *v,
                              double *alpha,
                              double *beta);

/**
 * Runs the four property checkers.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum AdsStatus ads_check_properties(const struct AdsInstance *inst, struct AdsProperties *out);

/**
 * Evaluates `policy` exactly over every arrival order and writes the JSON
 * report. Stream policies use `v` from `mode`; `seed` drives the mixed
 * policy's coin.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum AdsStatus ads_evaluate_json(const struct AdsInstance *inst,
                                 enum AdsPolicy policy,
                                 enum AdsVMode mode,
                                 uint64_t seed,
                                 char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADASTREAM_H */
