#ifndef BOSONIC_FRIDGE_H
#define BOSONIC_FRIDGE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BfStatus {
  BF_STATUS_OK = 0,
  BF_STATUS_NULL_POINTER = 1,
  BF_STATUS_INVALID_UTF8 = 2,
  BF_STATUS_INVALID_ARGUMENT = 3,
  BF_STATUS_VALIDATION = 4,
  BF_STATUS_NUMERICAL = 5,
  BF_STATUS_MEMORY_BUDGET = 6,
  BF_STATUS_NO_OSCILLATION = 7,
  BF_STATUS_OUT_OF_RANGE = 8,
  BF_STATUS_PANIC = 9,
} BfStatus;

typedef struct BfParams BfParams;

typedef struct BfTrajectory BfTrajectory;

typedef struct BfSteadyReport {
  double theta_c_mk;
  double theta_c_entropy_mk;
  double ratio;
  double mean_n[3];
  /**
   * Heat currents in attowatt, order c, h, r.
   */
  double j_attowatt[3];
  /**
   * NaN when the hot current vanishes.
   */
  double cop_current;
  double cop_freq;
  double cooling_margin;
  double thermality_tvd;
  double residual;
} BfSteadyReport;

typedef struct BfRecord {
  double t_ns;
  double phi_rad;
  double n[3];
  double theta_c_mk;
  double theta_c_entropy_mk;
  double j_attowatt[3];
} BfRecord;

typedef struct BfTransientEvent {
  double t_min_ns;
  double theta_min_mk;
  double steady_theta_mk;
  double below_ns;
  bool qualifying;
  bool below_at_end;
} BfTransientEvent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bf_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t bf_last_error_message(char *buf, size_t len);

/**
 * Creates parameters from a bundled preset name such as `"table1"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BfStatus bf_params_from_preset(const char *name, struct BfParams **out);

/**
 * Releases parameters; null is ignored.
 *
 * # Safety
 * `p` must come from `bf_params_from_preset` and not be used afterwards.
 */
void bf_params_free(struct BfParams *p);

/**
 * # Safety
 * `p` must be a live handle.
 */
enum BfStatus bf_params_set_ej_ghz(struct BfParams *p, double ej_ghz);

/**
 * # Safety
 * `p` must be a live handle.
 */
enum BfStatus bf_params_set_phi(struct BfParams *p, double phi_rad);

/**
 * # Safety
 * `p` must be a live handle.
 */
enum BfStatus bf_params_set_t_hot_mk(struct BfParams *p, double t_mk);

/**
 * Fock truncation per mode, order c, h, r.
 *
 * # Safety
 * `p` must be a live handle.
 */
enum BfStatus bf_params_set_dims(struct BfParams *p, size_t d_c, size_t d_h, size_t d_r);

/**
 * Checks the parameters without solving anything.
 *
 * # Safety
 * `p` must be a live handle.
 */
enum BfStatus bf_params_validate(const struct BfParams *p);

/**
 * Steady state and its thermodynamic summary.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
enum BfStatus bf_steady_report(const struct BfParams *p, struct BfSteadyReport *out);

/**
 * Evolves `cycles` on/off windows from the bath-thermal state, sampling
 * every `sample_ns`.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
enum BfStatus bf_run_on_off(const struct BfParams *p,
                            double on_ns,
                            double off_ns,
                            size_t cycles,
                            double sample_ns,
                            struct BfTrajectory **out);

/**
 * Number of samples; 0 for null.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t bf_trajectory_len(const struct BfTrajectory *t);

/**
 * # Safety
 * `t` must be a live handle and `out` a valid pointer.
 */
enum BfStatus bf_trajectory_get(const struct BfTrajectory *t, size_t index, struct BfRecord *out);

/**
 * # Safety
 * `t` must come from `bf_run_on_off` and not be used afterwards.
 */
void bf_trajectory_free(struct BfTrajectory *t);

/**
 * Runs the switch-off-at-first-minimum protocol with default options.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
enum BfStatus bf_transient(const struct BfParams *p, struct BfTransientEvent *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOSONIC_FRIDGE_H */
