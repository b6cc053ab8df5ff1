/* C interface to the trapped-ion pulse compiler. Generated by cbindgen; do not edit. */

#ifndef IONC_H
#define IONC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define IONC_OK 0

#define IONC_ERR_ARG 1

#define IONC_ERR_PARSE 2

#define IONC_ERR_COMPILE 3

#define IONC_ERR_VERIFY 4

#define IONC_ERR_PANIC 5

#define IONC_OBJECTIVE_TIME 0

#define IONC_OBJECTIVE_ERROR 1

#define IONC_OBJECTIVE_BALANCED 2

/**
 * An immutable logical circuit.
 */
typedef struct IoncCircuit IoncCircuit;

/**
 * An immutable machine description.
 */
typedef struct IoncMachine IoncMachine;

/**
 * A finished compilation: the schedule and report are rendered once and
 * handed out as borrowed C strings.
 */
typedef struct IoncResult IoncResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a circuit file (same format as the `ionc` CLI accepts).
 * Returns null on failure; see `ionc_last_error_message`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string or null.
 */
struct IoncCircuit *ionc_circuit_parse(const char *text);

/**
 * Number of logical qubits in the circuit, or -1 for a null handle.
 *
 * # Safety
 * `circuit` must be null or a live pointer from `ionc_circuit_parse`.
 */
int ionc_circuit_qubits(const struct IoncCircuit *circuit);

/**
 * # Safety
 * `circuit` must be null or a pointer from `ionc_circuit_parse` that has
 * not been freed yet.
 */
void ionc_circuit_free(struct IoncCircuit *circuit);

/**
 * The built-in five-ion machine.
 */
struct IoncMachine *ionc_machine_default(void);

/**
 * Parses a machine configuration file. Returns null on failure.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string or null.
 */
struct IoncMachine *ionc_machine_parse(const char *text);

/**
 * # Safety
 * `machine` must be null or a pointer from a machine constructor that has
 * not been freed yet.
 */
void ionc_machine_free(struct IoncMachine *machine);

/**
 * Compiles `circuit` for `machine`. `objective` is one of the
 * `IONC_OBJECTIVE_*` constants; `lambda` weighs duration against error for
 * the balanced objective (ignored otherwise) and must lie in [0, 1].
 * When `verify` is nonzero the schedule is checked against the input
 * unitary and a mismatch fails the call with `IONC_ERR_VERIFY`.
 * Returns null on failure.
 *
 * # Safety
 * `circuit` and `machine` must be live pointers from the respective
 * constructors, or null.
 */
struct IoncResult *ionc_compile(const struct IoncCircuit *circuit,
                                const struct IoncMachine *machine,
                                int objective,
                                double lambda,
                                int verify);

/**
 * The emitted schedule text. Borrowed from `result`; do not free.
 *
 * # Safety
 * `result` must be null or a live pointer from `ionc_compile`.
 */
const char *ionc_result_schedule(const struct IoncResult *result);

/**
 * The human-readable compilation report. Borrowed from `result`.
 *
 * # Safety
 * `result` must be null or a live pointer from `ionc_compile`.
 */
const char *ionc_result_report(const struct IoncResult *result);

/**
 * Total schedule duration in microseconds, or a negative value for a null
 * handle.
 *
 * # Safety
 * `result` must be null or a live pointer from `ionc_compile`.
 */
double ionc_result_duration_us(const struct IoncResult *result);

/**
 * Number of single-qubit pulses, or -1 for a null handle.
 *
 * # Safety
 * `result` must be null or a live pointer from `ionc_compile`.
 */
int ionc_result_pulses_1q(const struct IoncResult *result);

/**
 * Number of two-qubit XX pulses, or -1 for a null handle.
 *
 * # Safety
 * `result` must be null or a live pointer from `ionc_compile`.
 */
int ionc_result_xx_count(const struct IoncResult *result);

/**
 * 1 when the schedule was verified against the input unitary, 0 when
 * verification was skipped or disabled, -1 for a null handle.
 *
 * # Safety
 * `result` must be null or a live pointer from `ionc_compile`.
 */
int ionc_result_verified(const struct IoncResult *result);

/**
 * # Safety
 * `result` must be null or a pointer from `ionc_compile` that has not been
 * freed yet. Strings borrowed from it become dangling.
 */
void ionc_result_free(struct IoncResult *result);

/**
 * Status of the most recent `ionc_*` call on this thread.
 */
int ionc_last_error_code(void);

/**
 * Message for the most recent failure on this thread; empty after a
 * success. Borrowed; valid until the next `ionc_*` call on this thread.
 */
const char *ionc_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IONC_H */
