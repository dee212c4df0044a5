#ifndef DISPERSE_H
#define DISPERSE_H

#pragma once

/* Generated by cbindgen from disperse-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which linearized invasion problem to solve.
 */
typedef enum DisperseLinearization {
  /**
   * Growth of species u at the trivial state.
   */
  DISPERSE_LINEARIZATION_ZERO_U = 0,
  /**
   * Growth of species v at the trivial state.
   */
  DISPERSE_LINEARIZATION_ZERO_V = 1,
  /**
   * Species v invading the semi-trivial state (u*, 0).
   */
  DISPERSE_LINEARIZATION_INVADER_V_AT_U_STAR = 2,
  /**
   * Species u invading the semi-trivial state (0, v*).
   */
  DISPERSE_LINEARIZATION_INVADER_U_AT_V_STAR = 3,
} DisperseLinearization;

/**
 * Competition outcome of a finished run.
 */
typedef enum DisperseOutcome {
  DISPERSE_OUTCOME_UNDETERMINED = 0,
  DISPERSE_OUTCOME_COEXISTENCE = 1,
  DISPERSE_OUTCOME_EXCLUSION_U_WINS = 2,
  DISPERSE_OUTCOME_EXCLUSION_V_WINS = 3,
  DISPERSE_OUTCOME_EXTINCTION = 4,
} DisperseOutcome;

/**
 * Time-series column selector.
 */
typedef enum DisperseSeriesColumn {
  DISPERSE_SERIES_COLUMN_TIME = 0,
  DISPERSE_SERIES_COLUMN_MASS_U = 1,
  DISPERSE_SERIES_COLUMN_MASS_V = 2,
  DISPERSE_SERIES_COLUMN_SUP_U = 3,
  DISPERSE_SERIES_COLUMN_SUP_V = 4,
  DISPERSE_SERIES_COLUMN_RATE_U = 5,
  DISPERSE_SERIES_COLUMN_RATE_V = 6,
} DisperseSeriesColumn;

/**
 * Status code returned by every fallible call.
 */
typedef enum DisperseStatus {
  DISPERSE_STATUS_OK = 0,
  DISPERSE_STATUS_NULL_ARGUMENT = 1,
  DISPERSE_STATUS_INVALID_UTF8 = 2,
  DISPERSE_STATUS_PARSE_ERROR = 3,
  DISPERSE_STATUS_RUN_FAILED = 4,
  DISPERSE_STATUS_BUFFER_TOO_SMALL = 5,
  DISPERSE_STATUS_INDEX_OUT_OF_RANGE = 6,
} DisperseStatus;

/**
 * Opaque run-result handle.
 */
typedef struct DisperseRun DisperseRun;

/**
 * Opaque scenario handle.
 */
typedef struct DisperseScenario DisperseScenario;

/**
 * Opaque verification-report handle.
 */
typedef struct DisperseVerify DisperseVerify;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static C string.
 */
const char *disperse_version(void);

/**
 * Message describing the most recent error on this thread.
 */
const char *disperse_last_error_message(void);

/**
 * Parse a scenario from text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DisperseStatus disperse_scenario_from_string(const char *text, struct DisperseScenario **out);

/**
 * Load and parse a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DisperseStatus disperse_scenario_from_file(const char *path, struct DisperseScenario **out);

/**
 * Free a scenario handle (accepts NULL).
 *
 * # Safety
 * `handle` must come from a `disperse_scenario_*` constructor.
 */
void disperse_scenario_free(struct DisperseScenario *handle);

/**
 * Number of grid cells of the resolved scenario.
 *
 * # Safety
 * `handle` must be a live scenario handle.
 */
size_t disperse_scenario_n_cells(const struct DisperseScenario *handle);

/**
 * Override the `[run] seed` key.
 *
 * # Safety
 * `handle` must be a live scenario handle.
 */
enum DisperseStatus disperse_scenario_set_seed(struct DisperseScenario *handle, uint64_t seed);

/**
 * Override the `[grid] n_cells` key.
 *
 * # Safety
 * `handle` must be a live scenario handle.
 */
enum DisperseStatus disperse_scenario_set_n_cells(struct DisperseScenario *handle, size_t n_cells);

/**
 * Override the `[stepper] dt` key.
 *
 * # Safety
 * `handle` must be a live scenario handle.
 */
enum DisperseStatus disperse_scenario_set_dt(struct DisperseScenario *handle, double dt);

/**
 * Integrate the scenario and classify the outcome.
 *
 * # Safety
 * `handle` must be a live scenario handle and `out` a valid pointer.
 */
enum DisperseStatus disperse_simulate(const struct DisperseScenario *handle,
                                      struct DisperseRun **out);

/**
 * Free a run handle (accepts NULL).
 *
 * # Safety
 * `handle` must come from `disperse_simulate`.
 */
void disperse_run_free(struct DisperseRun *handle);

/**
 * Outcome of a finished run; coexistence coefficients are written to
 * `alpha`/`beta` when non-null.
 *
 * # Safety
 * `handle` must be a live run handle; `outcome`, `alpha`, `beta` may be NULL.
 */
enum DisperseStatus disperse_run_outcome(const struct DisperseRun *handle,
                                         enum DisperseOutcome *outcome,
                                         double *alpha,
                                         double *beta);

/**
 * 1 if the steady-state criterion stopped the run, else 0.
 *
 * # Safety
 * `handle` must be a live run handle.
 */
int32_t disperse_run_steady(const struct DisperseRun *handle);

/**
 * Final integration time.
 *
 * # Safety
 * `handle` must be a live run handle.
 */
double disperse_run_final_time(const struct DisperseRun *handle);

/**
 * Number of grid cells in the final profiles.
 *
 * # Safety
 * `handle` must be a live run handle.
 */
size_t disperse_run_n_cells(const struct DisperseRun *handle);

/**
 * Copy the final profiles into caller buffers of length `len` (== n_cells).
 * Any of `x`, `u`, `v` may be NULL to skip that column.
 *
 * # Safety
 * Non-null buffers must hold at least `len` doubles.
 */
enum DisperseStatus disperse_run_final_profiles(const struct DisperseRun *handle,
                                                double *x,
                                                double *u,
                                                double *v,
                                                size_t len);

/**
 * Number of recorded time-series samples.
 *
 * # Safety
 * `handle` must be a live run handle.
 */
size_t disperse_run_sample_count(const struct DisperseRun *handle);

/**
 * Copy one time-series column into a caller buffer of length `len`.
 *
 * # Safety
 * `out` must hold at least `len` doubles.
 */
enum DisperseStatus disperse_run_series(const struct DisperseRun *handle,
                                        enum DisperseSeriesColumn column,
                                        double *out,
                                        size_t len);

/**
 * Principal eigenvalue of one invasion linearization. Solves the needed
 * single-species stationary problem first.
 *
 * # Safety
 * `handle` must be a live scenario handle; `sigma1` must be valid.
 */
enum DisperseStatus disperse_principal_eigenvalue(const struct DisperseScenario *handle,
                                                  enum DisperseLinearization which,
                                                  double *sigma1);

/**
 * Run the verification battery.
 *
 * # Safety
 * `handle` must be a live scenario handle and `out` a valid pointer.
 */
enum DisperseStatus disperse_verify(const struct DisperseScenario *handle,
                                    struct DisperseVerify **out);

/**
 * Free a verification handle (accepts NULL).
 *
 * # Safety
 * `handle` must come from `disperse_verify`.
 */
void disperse_verify_free(struct DisperseVerify *handle);

/**
 * 1 if every check passed.
 *
 * # Safety
 * `handle` must be a live verify handle.
 */
int32_t disperse_verify_passed(const struct DisperseVerify *handle);

/**
 * Number of machine-readable check rows.
 *
 * # Safety
 * `handle` must be a live verify handle.
 */
size_t disperse_verify_check_count(const struct DisperseVerify *handle);

/**
 * Name of check `index`; valid until the handle is freed.
 *
 * # Safety
 * `handle` must be a live verify handle.
 */
const char *disperse_verify_check_name(const struct DisperseVerify *handle, size_t index);

/**
 * Numbers of check `index`: lhs, rhs, relative error, satisfied flag.
 * Output pointers may be NULL to skip fields.
 *
 * # Safety
 * `handle` must be a live verify handle.
 */
enum DisperseStatus disperse_verify_check_values(const struct DisperseVerify *handle,
                                                 size_t index,
                                                 double *lhs,
                                                 double *rhs,
                                                 double *rel_err,
                                                 int32_t *satisfied);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DISPERSE_H */
