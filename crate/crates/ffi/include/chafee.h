#ifndef CHAFEE_H
#define CHAFEE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ChafeeStatus {
  CHAFEE_STATUS_OK = 0,
  CHAFEE_STATUS_NULL_POINTER = 1,
  CHAFEE_STATUS_INVALID_ARGUMENT = 2,
  CHAFEE_STATUS_HYPOTHESIS_FAILED = 3,
  CHAFEE_STATUS_NUMERICAL_FAILURE = 4,
  CHAFEE_STATUS_PANIC = 5,
} ChafeeStatus;

typedef enum ChafeePlacement {
  CHAFEE_PLACEMENT_BOUNDARY = 0,
  CHAFEE_PLACEMENT_INTERIOR = 1,
  CHAFEE_PLACEMENT_NONE = 2,
} ChafeePlacement;

typedef enum ChafeeConstantSource {
  CHAFEE_CONSTANT_SOURCE_EXPLICIT = 0,
  CHAFEE_CONSTANT_SOURCE_OPTIMAL = 1,
} ChafeeConstantSource;

typedef enum ChafeeScheme {
  CHAFEE_SCHEME_SEMI_IMPLICIT = 0,
  CHAFEE_SCHEME_EXPLICIT = 1,
} ChafeeScheme;

// Result of a Monte Carlo Lyapunov run.
typedef struct ChafeeMcResult ChafeeMcResult;

// Model parameters and domain geometry.
typedef struct ChafeeModel ChafeeModel;

// Result of a theta sweep.
typedef struct ChafeeSweep ChafeeSweep;

// Admissible range for `alpha^2 / 2`; the upper end is open.
typedef struct ChafeeInterval {
  double lower;
  double upper;
  bool lower_closed;
  double theta;
} ChafeeInterval;

// Simulation settings. A negative `t_burn_in` selects `0.1 * t_final`.
typedef struct ChafeeSimParams {
  size_t n_nodes;
  double dt;
  double t_final;
  double t_burn_in;
  uint64_t seed;
  bool linearized;
  size_t renormalize_every;
  enum ChafeeScheme scheme;
  bool second_order_stencil;
} ChafeeSimParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *chafee_last_error(void);

// Validates and stores model parameters. `dimension = 1` with
// `half_diameter = L/2` describes the interval `(0, L)`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum ChafeeStatus chafee_model_new(double beta,
                                   double lambda,
                                   double alpha,
                                   enum ChafeePlacement noise,
                                   uint32_t dimension,
                                   double half_diameter,
                                   struct ChafeeModel **out);

// # Safety
// `model` must be null or a handle from [`chafee_model_new`] not yet freed.
void chafee_model_free(struct ChafeeModel *model);

// Explicit trace constant `C_theta`.
//
// # Safety
// `out` must be valid for one write.
enum ChafeeStatus chafee_explicit_constant(double theta,
                                           uint32_t dimension,
                                           double half_diameter,
                                           double *out);

// Optimal 1D trace constant on `(0, length)`.
//
// # Safety
// `out` must be valid for one write.
enum ChafeeStatus chafee_optimal_constant_1d(double theta, double length, double tol, double *out);

// Feasible `theta` interval for boundary noise with the explicit constant.
// Returns `HypothesisFailed` if it is empty.
//
// # Safety
// `model` must be a live handle; `lo` and `hi` valid for one write each.
enum ChafeeStatus chafee_theta_feasible_boundary(const struct ChafeeModel *model,
                                                 double *lo,
                                                 double *hi);

// Sweeps `n_theta` values of `theta` for the given placement.
//
// # Safety
// `model` must be a live handle; `out` valid for one write.
enum ChafeeStatus chafee_sweep_run(const struct ChafeeModel *model,
                                   enum ChafeePlacement noise,
                                   enum ChafeeConstantSource source,
                                   size_t n_theta,
                                   struct ChafeeSweep **out);

// Envelope `(inf lower, sup upper)` of `alpha^2 / 2` and whether the union
// of ranges is connected.
//
// # Safety
// `sweep` must be a live handle; outputs valid for one write each.
enum ChafeeStatus chafee_sweep_envelope(const struct ChafeeSweep *sweep,
                                        double *lower,
                                        double *upper,
                                        bool *connected);

// Number of per-theta intervals in the sweep (0 for a null handle).
//
// # Safety
// `sweep` must be null or a live handle.
size_t chafee_sweep_len(const struct ChafeeSweep *sweep);

// # Safety
// `sweep` must be a live handle; `out` valid for one write.
enum ChafeeStatus chafee_sweep_get(const struct ChafeeSweep *sweep,
                                   size_t index,
                                   struct ChafeeInterval *out);

// # Safety
// `sweep` must be null or a live handle.
void chafee_sweep_free(struct ChafeeSweep *sweep);

// First `n` positive roots `mu` of the characteristic equation with
// Robin coefficient `b = beta + lambda`.
//
// # Safety
// `out` must be valid for `n` writes.
enum ChafeeStatus chafee_mu_roots(double b, size_t n, double *out);

// `beta > mu_1^2`: writes the verdict and the margin `beta - mu_1^2`.
//
// # Safety
// `model` must be a live handle; outputs valid for one write each.
enum ChafeeStatus chafee_instability(const struct ChafeeModel *model,
                                     bool *unstable,
                                     double *margin);

// Default simulation settings.
struct ChafeeSimParams chafee_sim_params_default(void);

// Monte Carlo Lyapunov estimates on `(0, 1)` from the first eigenmode
// of the linearised problem.
//
// # Safety
// `model` and `sim` must be valid; `out` valid for one write.
enum ChafeeStatus chafee_mc_run(const struct ChafeeModel *model,
                                const struct ChafeeSimParams *sim,
                                size_t n_paths,
                                struct ChafeeMcResult **out);

// Median, mean and fraction of negative estimates.
//
// # Safety
// `res` must be a live handle; outputs valid for one write each.
enum ChafeeStatus chafee_mc_summary(const struct ChafeeMcResult *res,
                                    double *median,
                                    double *mean,
                                    double *fraction_negative);

// Per-path estimates in path order; writes at most `capacity` values and
// returns the number of paths.
//
// # Safety
// `res` must be null or a live handle; `out` valid for `capacity` writes
// (may be null when `capacity` is 0).
size_t chafee_mc_estimates(const struct ChafeeMcResult *res, double *out, size_t capacity);

// # Safety
// `res` must be null or a live handle.
void chafee_mc_free(struct ChafeeMcResult *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAFEE_H */
