#ifndef QQBF_H
#define QQBF_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QqbfStatus {
  QQBF_STATUS_OK = 0,
  /**
   * Null pointer or buffer of the wrong size.
   */
  QQBF_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed JSON, non-coprime pair, dimension mismatch.
   */
  QQBF_STATUS_INVALID_INPUT = 2,
  /**
   * Capacity, incompatibility or numerical breakdown.
   */
  QQBF_STATUS_INFEASIBLE = 3,
  QQBF_STATUS_VERIFICATION = 4,
  /**
   * A panic was caught at the boundary.
   */
  QQBF_STATUS_INTERNAL = 5,
} QqbfStatus;

/**
 * Synthesized circuit.
 */
typedef struct QqbfCircuit QqbfCircuit;

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call on the same thread.
 */
const char *qqbf_last_error(void);

/**
 * Synthesizes `fn_json`. `ns` may be null with `ns_len == 0` to use the
 * function's own degrees.
 *
 * # Safety
 * Pointers must be valid; `ns` must hold `ns_len` entries.
 */
enum QqbfStatus qqbf_synthesize_json(const char *fn_json,
                                     const size_t *ns,
                                     size_t ns_len,
                                     struct QqbfCircuit **out);

/**
 * Loads a circuit from the JSON written by `qqbf_circuit_to_json`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QqbfStatus qqbf_circuit_from_json(const char *json, struct QqbfCircuit **out);

/**
 * # Safety
 * `c` must come from this library and not be freed twice. Null is ignored.
 */
void qqbf_circuit_free(struct QqbfCircuit *c);

/**
 * # Safety
 * Pointers must be valid.
 */
enum QqbfStatus qqbf_circuit_num_qubits(const struct QqbfCircuit *c, size_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum QqbfStatus qqbf_circuit_dim(const struct QqbfCircuit *c, size_t *out);

/**
 * Copies the unitary row-major as interleaved (re, im); `len` must be
 * `2 * dim * dim`.
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum QqbfStatus qqbf_circuit_unitary(const struct QqbfCircuit *c, double *buf, size_t len);

/**
 * Simulates at `z` (e.g. `"1+2i,inf"`). Writes the herald probability and,
 * if `out_state` is non-null, the normalized output qubit as four doubles
 * (zeros when the herald probability vanishes).
 *
 * # Safety
 * Pointers must be valid; `out_state` holds 4 doubles when non-null.
 */
enum QqbfStatus qqbf_circuit_run(const struct QqbfCircuit *c,
                                 const char *z,
                                 double *out_prob,
                                 double *out_state);

/**
 * # Safety
 * Pointers must be valid. Free the string with `qqbf_string_free`.
 */
enum QqbfStatus qqbf_circuit_to_json(const struct QqbfCircuit *c, char **out);

/**
 * # Safety
 * `s` must come from this library. Null is ignored.
 */
void qqbf_string_free(char *s);

/**
 * Compatibility report of g1 with g0 as JSON.
 *
 * # Safety
 * Pointers must be valid; `ns` holds `ns_len` entries.
 */
enum QqbfStatus qqbf_compatibility_json(const char *g0_json,
                                        const char *g1_json,
                                        const size_t *ns,
                                        size_t ns_len,
                                        char **out);

/**
 * Closed-form success probability at `z`.
 *
 * # Safety
 * Pointers must be valid; `ns` holds `ns_len` entries.
 */
enum QqbfStatus qqbf_success_probability(const char *fn_json,
                                         const size_t *ns,
                                         size_t ns_len,
                                         const char *z,
                                         double *out);

#endif  /* QQBF_H */
