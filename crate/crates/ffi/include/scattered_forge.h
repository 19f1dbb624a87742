#ifndef SCATTERED_FORGE_H
#define SCATTERED_FORGE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SfBarrierKind {
  /**
   * The recursive barrier amalgamation.
   */
  SF_BARRIER_KIND_RECURSIVE = 0,
  /**
   * The amalgamation read off the canonical sequences.
   */
  SF_BARRIER_KIND_CANONICAL = 1,
} SfBarrierKind;

typedef enum SfStatus {
  SF_STATUS_OK = 0,
  /**
   * A checked property fails; the message names the witness.
   */
  SF_STATUS_VIOLATION = 1,
  /**
   * Input could not be parsed or is out of shape.
   */
  SF_STATUS_MALFORMED = 2,
  SF_STATUS_NULL_POINTER = 3,
  /**
   * Input parsed but breaks an operation's precondition.
   */
  SF_STATUS_INVALID = 4,
  /**
   * Two conditions cannot be amalgamated.
   */
  SF_STATUS_INCOMPATIBLE = 5,
  /**
   * A schedule cannot be met within the universe.
   */
  SF_STATUS_INFEASIBLE = 6,
  /**
   * The output buffer is too small; the needed length is still reported.
   */
  SF_STATUS_BUFFER_TOO_SMALL = 7,
  SF_STATUS_PANIC = 8,
} SfStatus;

/**
 * A condition.
 */
typedef struct SfCondition SfCondition;

/**
 * An order with an optional barrier map.
 */
typedef struct SfOrder SfOrder;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message for the last failing call on this thread, or NULL. Valid
 * until the next failing call on the same thread.
 */
const char *sf_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void sf_string_free(char *s);

/**
 * Parses an order file.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum SfStatus sf_order_from_json(const char *json, struct SfOrder **out);

/**
 * # Safety
 * `order` must be NULL or a handle from this library, not yet freed.
 */
void sf_order_free(struct SfOrder *order);

/**
 * Checks admissibility; the stored barriers are used when present, the
 * minimal ones otherwise.
 *
 * # Safety
 * `order` must be a live handle.
 */
enum SfStatus sf_order_check_admissible(const struct SfOrder *order);

/**
 * Writes the level sizes of the derivation into `buf` and their count into
 * `len`. With `cap` too small only `len` is written.
 *
 * # Safety
 * `order` must be a live handle; `buf` must hold `cap` entries; `len` must
 * be writable.
 */
enum SfStatus sf_order_cardinal_sequence(const struct SfOrder *order,
                                         size_t *buf,
                                         size_t cap,
                                         size_t *len);

/**
 * The Hasse diagram in DOT syntax.
 *
 * # Safety
 * `order` must be a live handle; `out` must be writable.
 */
enum SfStatus sf_order_to_dot(const struct SfOrder *order, char **out);

/**
 * Parses a condition file.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum SfStatus sf_condition_from_json(const char *json, struct SfCondition **out);

/**
 * # Safety
 * `cond` must be NULL or a handle from this library, not yet freed.
 */
void sf_condition_free(struct SfCondition *cond);

/**
 * Checks clauses (1) to (5).
 *
 * # Safety
 * `cond` must be a live handle.
 */
enum SfStatus sf_condition_validate(const struct SfCondition *cond);

/**
 * Amalgamates two conditions along the point isomorphism `iso_json`.
 *
 * The systems are combined by union along `sys_iso_json` when it is not
 * NULL, otherwise by copying the first system into node `into_code` of the
 * second when `into_code` is non-negative, otherwise by union along the
 * empty map.
 *
 * # Safety
 * `q1`, `q2` must be live handles; `iso_json` a nul-terminated string;
 * `sys_iso_json` NULL or a nul-terminated string; `out` writable.
 */
enum SfStatus sf_condition_amalgamate(const struct SfCondition *q1,
                                      const struct SfCondition *q2,
                                      const char *iso_json,
                                      const char *sys_iso_json,
                                      int64_t into_code,
                                      enum SfBarrierKind kind,
                                      struct SfCondition **out);

/**
 * Runs the full density schedule of the universe from the empty condition.
 *
 * # Safety
 * `out` must be writable.
 */
enum SfStatus sf_simulate(uint32_t width,
                          uint32_t height,
                          uint32_t fanout,
                          uint64_t seed,
                          struct SfCondition **out);

/**
 * A copy of the condition's order and barriers as an order handle.
 *
 * # Safety
 * `cond` must be a live handle; `out` must be writable.
 */
enum SfStatus sf_condition_order(const struct SfCondition *cond, struct SfOrder **out);

/**
 * The condition as JSON.
 *
 * # Safety
 * `cond` must be a live handle; `out` must be writable.
 */
enum SfStatus sf_condition_to_json(const struct SfCondition *cond, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCATTERED_FORGE_H */
