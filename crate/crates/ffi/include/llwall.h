#ifndef LLWALL_H
#define LLWALL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum LlwallStatus {
  LLWALL_STATUS_OK = 0,
  LLWALL_STATUS_NULL_POINTER = 1,
  LLWALL_STATUS_INVALID_ARGUMENT = 2,
  LLWALL_STATUS_NUMERICAL = 3,
  LLWALL_STATUS_NO_WALL = 4,
  LLWALL_STATUS_IO = 5,
  LLWALL_STATUS_PANIC = 6,
} LlwallStatus;

/**
 * Simulation frame selector.
 */
typedef enum LlwallFrame {
  LLWALL_FRAME_LAB = 0,
  LLWALL_FRAME_MOVING = 1,
} LlwallFrame;

/**
 * Opaque sphere-valued field.
 */
typedef struct LlwallField LlwallField;

/**
 * Opaque uniform grid.
 */
typedef struct LlwallGrid LlwallGrid;

typedef struct LlwallSteeringParams {
  size_t n;
  double half_width;
  double cfl;
  double sigma1;
  double sigma2;
  double delta1;
  double delta2;
  double theta1;
  double epsilon;
  double delta0;
  double perturbation;
  uint64_t seed;
  /**
   * Requested switch time; values <= 0 let the planner choose.
   */
  double switch_time_hint;
  double post_horizon;
} LlwallSteeringParams;

typedef struct LlwallSteeringSummary {
  double switch_time;
  double first_level;
  double initial_distance;
  double distance_at_switch;
  double theta2;
  double theta_limit;
  double sigma_limit;
  double lambda_drift;
  double decay_rate;
  double max_norm_drift;
  bool passed;
} LlwallSteeringSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t llwall_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum LlwallStatus llwall_grid_new(double half_width, size_t n, struct LlwallGrid **out);

/**
 * # Safety
 * `grid` must be null or a handle from `llwall_grid_new` not yet freed.
 */
void llwall_grid_free(struct LlwallGrid *grid);

/**
 * # Safety
 * `grid` must be a live grid handle.
 */
double llwall_grid_spacing(const struct LlwallGrid *grid);

/**
 * Travelling wall profile (delta, theta, sigma) at time t.
 *
 * # Safety
 * `grid` must be a live grid handle and `out` valid for writing a handle.
 */
enum LlwallStatus llwall_field_wall(const struct LlwallGrid *grid,
                                    double delta,
                                    double theta,
                                    double sigma,
                                    double t,
                                    struct LlwallField **out);

/**
 * Field from 3 * N interleaved components (u1, u2, u3 per node).
 *
 * # Safety
 * `values` must point to `len` readable doubles.
 */
enum LlwallStatus llwall_field_from_values(const struct LlwallGrid *grid,
                                           const double *values,
                                           size_t len,
                                           struct LlwallField **out);

/**
 * # Safety
 * `field` must be null or a live field handle.
 */
void llwall_field_free(struct LlwallField *field);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live field handle.
 */
size_t llwall_field_len(const struct LlwallField *field);

/**
 * Copy the 3 * N interleaved components into `buf`.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum LlwallStatus llwall_field_values(const struct LlwallField *field, double *buf, size_t len);

/**
 * Integrate under a constant field with dt = cfl * h^2.
 *
 * # Safety
 * `field` must be a live field handle and `out` valid for writing a handle.
 */
enum LlwallStatus llwall_simulate(const struct LlwallField *field,
                                  double delta,
                                  double t_end,
                                  double cfl,
                                  enum LlwallFrame frame,
                                  struct LlwallField **out);

/**
 * # Safety
 * Pointers must be valid; `sigma` and `theta` must be writable.
 */
enum LlwallStatus llwall_track_wall(const struct LlwallField *field, double *sigma, double *theta);

/**
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum LlwallStatus llwall_h2_distance(const struct LlwallField *a,
                                     const struct LlwallField *b,
                                     double *out);

/**
 * Best-matching phase and distance to the travelling wall (delta, ., sigma) at t.
 *
 * # Safety
 * `field` must be live; `theta` and `distance` must be writable.
 */
enum LlwallStatus llwall_best_match(const struct LlwallField *field,
                                    double delta,
                                    double t,
                                    double sigma,
                                    double *theta,
                                    double *distance);

/**
 * Largest `k` eigenvalues of the discrete linearised operator, descending.
 *
 * # Safety
 * `eigenvalues` must point to `k` writable doubles.
 */
enum LlwallStatus llwall_spectrum(const struct LlwallGrid *grid, size_t k, double *eigenvalues);

/**
 * Default steering parameters.
 */
struct LlwallSteeringParams llwall_steering_default_params(void);

/**
 * Run the steering experiment and fill `out`.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum LlwallStatus llwall_run_steering(const struct LlwallSteeringParams *params,
                                      struct LlwallSteeringSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LLWALL_H */
