#ifndef FLEXJOINT_H
#define FLEXJOINT_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum FjStatus {
  FJ_STATUS_OK = 0,
  /**
   * Null pointer, bad enum value, malformed string.
   */
  FJ_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Parameter or configuration outside its admissible range.
   */
  FJ_STATUS_DOMAIN = 2,
  /**
   * Numerical fault while running (non-finite state, solver failure).
   */
  FJ_STATUS_RUNTIME = 3,
  /**
   * I/O failure.
   */
  FJ_STATUS_IO = 4,
} FjStatus;

/**
 * An owned simulation log.
 */
typedef struct FjLog FjLog;

/**
 * An owned, configurable simulation scenario.
 */
typedef struct FjScenario FjScenario;

/**
 * Per-joint summary metrics of a finished run.
 */
typedef struct FjMetrics {
  /**
   * Maximum absolute link tracking error (deg).
   */
  double max_err_deg;
  /**
   * Mean absolute link tracking error (deg).
   */
  double mean_err_deg;
  /**
   * Largest elastic-torque peak-to-peak swing after a reference velocity
   * reversal (N·m).
   */
  double reversal_tau_e_p2p;
  /**
   * Maximum commanded torque slew rate (N·m/s).
   */
  double max_tau_rate;
} FjMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message of the last error on this thread, or NULL if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *fj_last_error_message(void);

/**
 * Creates a scenario from a named parameter set and trajectory preset.
 * On success writes the new handle to `out`.
 *
 * # Safety
 * `param_set` and `preset_name` must be NUL-terminated strings; `out` must
 * be a valid pointer.
 */
enum FjStatus fj_scenario_new(const char *param_set,
                              const char *preset_name,
                              double amplitude,
                              struct FjScenario **out);

/**
 * Selects the plant's constitutive laws: 0 = hard backlash (piecewise),
 * 1 = smooth.
 *
 * # Safety
 * `s` must be a live handle from [`fj_scenario_new`].
 */
enum FjStatus fj_scenario_set_law(struct FjScenario *s, int32_t law);

/**
 * Sets integrator and controller timing.
 *
 * # Safety
 * `s` must be a live handle from [`fj_scenario_new`].
 */
enum FjStatus fj_scenario_set_timing(struct FjScenario *s,
                                     double dt_plant,
                                     double dt_ctrl,
                                     double duration);

/**
 * Selects the controller: feedforward 0 = none, 1 = rigid, 2 = flatness;
 * feedback 0 = none, 1 = conventional, 2 = model-based.
 *
 * # Safety
 * `s` must be a live handle from [`fj_scenario_new`].
 */
enum FjStatus fj_scenario_set_controller(struct FjScenario *s,
                                         int32_t feedforward,
                                         int32_t feedback);

/**
 * Sets measurement quantization (0 disables either one).
 *
 * # Safety
 * `s` must be a live handle from [`fj_scenario_new`].
 */
enum FjStatus fj_scenario_set_quantization(struct FjScenario *s,
                                           double quant_q,
                                           double quant_theta_dot);

/**
 * Scales the plant's full-contact stiffness relative to the controller
 * model (model-mismatch studies); 1.0 restores the matched plant.
 *
 * # Safety
 * `s` must be a live handle from [`fj_scenario_new`].
 */
enum FjStatus fj_scenario_set_plant_stiffness_scale(struct FjScenario *s, double scale);

/**
 * Runs the scenario; on success writes a new log handle to `out`.
 *
 * # Safety
 * `s` must be a live handle from [`fj_scenario_new`]; `out` must be valid.
 */
enum FjStatus fj_scenario_run(const struct FjScenario *s, struct FjLog **out);

/**
 * Number of logged control ticks.
 *
 * # Safety
 * `log` must be a live handle from [`fj_scenario_run`].
 */
uintptr_t fj_log_len(const struct FjLog *log);

/**
 * Number of joints in the log.
 *
 * # Safety
 * `log` must be a live handle from [`fj_scenario_run`].
 */
uintptr_t fj_log_joints(const struct FjLog *log);

/**
 * Computes summary metrics for one joint of a finished run.
 *
 * # Safety
 * `log` must be a live handle from [`fj_scenario_run`]; `out` must be valid.
 */
enum FjStatus fj_log_metrics(const struct FjLog *log, uintptr_t joint, struct FjMetrics *out);

/**
 * Writes the full log as CSV to `path`.
 *
 * # Safety
 * `log` must be a live handle; `path` a NUL-terminated string.
 */
enum FjStatus fj_log_write_csv(const struct FjLog *log, const char *path);

/**
 * Frees a scenario handle; NULL is a no-op.
 *
 * # Safety
 * `s` must be NULL or a handle not freed before.
 */
void fj_scenario_free(struct FjScenario *s);

/**
 * Frees a log handle; NULL is a no-op.
 *
 * # Safety
 * `log` must be NULL or a handle not freed before.
 */
void fj_log_free(struct FjLog *log);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLEXJOINT_H */
