/* SPDX-License-Identifier: Apache-2.0 */
#ifndef NDL_NDL_H
#define NDL_NDL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(NDL_BUILDING_LIBRARY)
#define NDL_API __declspec(dllexport)
#else
#define NDL_API __declspec(dllimport)
#endif
#else
#define NDL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ndl_status {
  NDL_OK = 0,
  NDL_ERR_DOMAIN = 1,
  NDL_ERR_RANGE = 2,
  NDL_ERR_UNSUPPORTED = 3,
  NDL_ERR_CONFIG = 4,
  NDL_ERR_DIMENSION = 5,
  NDL_ERR_IO = 6,
  NDL_ERR_NULL_ARGUMENT = 7,
  NDL_ERR_INTERNAL = 8
} ndl_status;

/* Message of the last failed call on this thread ("" after success). */
NDL_API const char* ndl_last_error(void);
NDL_API const char* ndl_status_string(ndl_status status);
NDL_API const char* ndl_version(void);
/* NDL_THREADS when set to a positive integer, else hardware concurrency. */
NDL_API int ndl_worker_count(void);

/* Strings returned through `const char**` stay valid until the owning handle
 * is freed or the same accessor is called again on it. */

/* Counter-based child seed of `master`. */
NDL_API uint64_t ndl_derive_seed(uint64_t master, uint64_t index);
/* Uniform unit vector (d values written to out). */
NDL_API ndl_status ndl_sphere_init(int d, uint64_t seed, double* out);
/* eta times a standard Gaussian vector; eta 0 selects 1/(sqrt(2) d). */
NDL_API ndl_status ndl_gaussian_init(int d, double eta, uint64_t seed, double* out);

/* ---- activations ---- */

typedef struct ndl_activation ndl_activation;

/* Ids: identity, relu, sigmoid, tanh, silu, swish:<b>, gelu, sine:<d>,
 * plateau, hermite:<c0>,<c1>,..., gated:<logistic|normal>:<b>. */
NDL_API ndl_status ndl_activation_parse(const char* id, ndl_activation** out);
NDL_API void ndl_activation_free(ndl_activation* act);
NDL_API ndl_status ndl_activation_id(const ndl_activation* act, const char** out);
NDL_API ndl_status ndl_activation_eval(const ndl_activation* act, double z, double* value, double* slope);

/* ---- Hermite expansions ---- */

typedef struct ndl_expansion ndl_expansion;

/* order 0 selects the default quadrature order for the activation. */
NDL_API ndl_status ndl_expand(const ndl_activation* act, int degree, int order, ndl_expansion** out);
NDL_API void ndl_expansion_free(ndl_expansion* ex);
NDL_API ndl_status ndl_expansion_degree(const ndl_expansion* ex, int* out);
NDL_API ndl_status ndl_expansion_quadrature_order(const ndl_expansion* ex, int* out);
/* Copies degree + 1 coefficients; `len` must be at least that. */
NDL_API ndl_status ndl_expansion_coeffs(const ndl_expansion* ex, double* out, size_t len);
NDL_API ndl_status ndl_expansion_l2(const ndl_expansion* ex, double* l2_total, double* residual,
                                    int* truncation_warning);
/* f(a) and f'(a); either output may be NULL. */
NDL_API ndl_status ndl_expansion_correlation(const ndl_expansion* ex, double a, double* f, double* f_prime);
NDL_API ndl_status ndl_expansion_q_sigma(const ndl_expansion* ex, double delta, double* out);
NDL_API ndl_status ndl_expansion_sphere_risk(const ndl_expansion* ex, double a, double* out);
/* Columns k, sigma_hat. */
NDL_API ndl_status ndl_expansion_write_csv(const ndl_expansion* ex, const char* path);

/* ---- 1-D landscape ---- */

typedef struct ndl_landscape ndl_landscape;

NDL_API ndl_status ndl_landscape_scan(const ndl_activation* act, double lo, double hi, int steps, int order,
                                      ndl_landscape** out);
NDL_API void ndl_landscape_free(ndl_landscape* land);
NDL_API ndl_status ndl_landscape_size(const ndl_landscape* land, size_t* out);
NDL_API ndl_status ndl_landscape_row(const ndl_landscape* land, size_t i, double* beta, double* r, double* r_prime,
                                     int* is_local_min);
NDL_API ndl_status ndl_landscape_minima_count(const ndl_landscape* land, size_t* out);
/* Minimum i; `is_bad` is 1 when r(β*) exceeds 1e-12. */
NDL_API ndl_status ndl_landscape_minimum(const ndl_landscape* land, size_t i, double* beta, double* r, int* is_bad);
/* Columns beta, r, r_prime, is_local_min. */
NDL_API ndl_status ndl_landscape_write_csv(const ndl_landscape* land, const char* path);
NDL_API ndl_status ndl_pop_condition(const ndl_activation* act, int order, int* holds, double* c);

/* ---- flows ---- */

typedef struct ndl_flow_config {
  double step;
  double horizon;
  double tolerance;
  int stop_when_converged;
  int record_every;
} ndl_flow_config;

NDL_API void ndl_flow_config_default(ndl_flow_config* cfg);

typedef struct ndl_trajectory ndl_trajectory;

/* β̇ = −r'(β). */
NDL_API ndl_status ndl_flow_1d(const ndl_activation* act, double beta0, const ndl_flow_config* cfg, int order,
                               ndl_trajectory** out);
/* ȧ = f'(a)(1 − a²). */
NDL_API ndl_status ndl_flow_sphere(const ndl_expansion* ex, double a0, const ndl_flow_config* cfg,
                                   ndl_trajectory** out);
/* ẇ = −∇R(w) in R^d; tensor_order 0 selects the default. */
NDL_API ndl_status ndl_flow_population(const ndl_activation* act, const double* w0, const double* w_star, size_t d,
                                       const ndl_flow_config* cfg, int tensor_order, ndl_trajectory** out);
NDL_API void ndl_trajectory_free(ndl_trajectory* tr);
NDL_API ndl_status ndl_trajectory_size(const ndl_trajectory* tr, size_t* rows, size_t* dim);
/* `state` receives dim values and may be NULL. */
NDL_API ndl_status ndl_trajectory_row(const ndl_trajectory* tr, size_t i, double* t, double* state, double* risk);
/* "horizon", "converged" or "diverged". */
NDL_API ndl_status ndl_trajectory_terminal_reason(const ndl_trajectory* tr, const char** out);
/* Columns t, state (label, or label1..labeld), risk. */
NDL_API ndl_status ndl_trajectory_write_csv(const ndl_trajectory* tr, const char* path, const char* state_label);

/* ---- finite samples ---- */

typedef struct ndl_dataset ndl_dataset;

NDL_API ndl_status ndl_dataset_generate(int n, int d, uint64_t seed, ndl_dataset** out);
/* "NDL1", u32 n, u32 d, u32 reserved, then n·d little-endian f64, row-major. */
NDL_API ndl_status ndl_dataset_load(const char* path, ndl_dataset** out);
NDL_API ndl_status ndl_dataset_save(const ndl_dataset* ds, const char* path);
NDL_API ndl_status ndl_dataset_save_csv(const ndl_dataset* ds, const char* path);
NDL_API void ndl_dataset_free(ndl_dataset* ds);
NDL_API ndl_status ndl_dataset_shape(const ndl_dataset* ds, int* n, int* d);

typedef struct ndl_empirical ndl_empirical;

/* The context keeps its own reference to the dataset. */
NDL_API ndl_status ndl_empirical_create(const ndl_dataset* ds, const ndl_activation* act, const double* w_star,
                                        size_t d, double radius, ndl_empirical** out);
NDL_API void ndl_empirical_free(ndl_empirical* ctx);
/* `gradient` receives d values and may be NULL. */
NDL_API ndl_status ndl_empirical_eval(const ndl_empirical* ctx, const double* w, size_t d, double* risk,
                                      double* gradient);
NDL_API ndl_status ndl_empirical_sup_gap(const ndl_empirical* ctx, int probes, uint64_t seed, double* risk_gap,
                                         double* grad_gap);
/* Trajectory states are the weights; `best_distance` may be NULL. */
NDL_API ndl_status ndl_empirical_flow_zero_init(const ndl_empirical* ctx, const ndl_flow_config* cfg,
                                                ndl_trajectory** out, double* best_distance);
NDL_API ndl_status ndl_empirical_flow_sphere(const ndl_empirical* ctx, const double* w0, size_t d,
                                             const ndl_flow_config* cfg, ndl_trajectory** out,
                                             double* best_distance);

/* ---- studies ---- */

typedef struct ndl_study_config {
  const char* scenario; /* constant_prob, high_prob, counterexample, theorem1 */
  const ndl_activation* activation;
  int d;
  int trials;
  ndl_flow_config flow;
  uint64_t seed;
  double delta;
  double eta; /* 0 selects 1/(sqrt(2) d) */
  int degree;
  int quadrature_order;
  int tensor_order;
  int max_extensions;
} ndl_study_config;

/* Scenario high_prob, SiLU unset (activation NULL), d 20, 500 trials, δ 1/2. */
NDL_API void ndl_study_config_default(ndl_study_config* cfg);

typedef struct ndl_report ndl_report;

NDL_API ndl_status ndl_study_run(const ndl_study_config* cfg, ndl_report** out);
/* λ-bound check of ⟨∇R(w), w − w*⟩ ≥ λ‖w − w*‖² with the default constants. */
NDL_API ndl_status ndl_assumption1_verify(const ndl_activation* act, int d, int probes, int mc_samples,
                                          double delta, uint64_t seed, ndl_report** out);
NDL_API ndl_status ndl_sphere_tail_check(int d, double delta, int draws, uint64_t seed, ndl_report** out);
NDL_API ndl_status ndl_gaussian_ball_check(int d, double eta, int draws, uint64_t seed, ndl_report** out);
NDL_API ndl_status ndl_sphere_cosine_ks(int d, int draws, uint64_t seed, double* out);
NDL_API void ndl_report_free(ndl_report* r);
/* JSON object with name, trials, successes, fraction, std_error,
 * theoretical_bound, bound_direction, pass, trial_seeds. */
NDL_API ndl_status ndl_report_json(const ndl_report* r, const char** out);
NDL_API ndl_status ndl_report_summary(const ndl_report* r, const char** out);
NDL_API ndl_status ndl_report_pass(const ndl_report* r, int* out);
/* Study extras: envelope rate, whether it is below 1e-8, converged trials that
 * broke the envelope. Assumption checks report min ratio and λ instead. */
NDL_API ndl_status ndl_report_rate(const ndl_report* r, double* rate, int* exponentially_small,
                                   int* envelope_violations);
NDL_API ndl_status ndl_report_ratio(const ndl_report* r, double* min_ratio, double* lambda);

/* ---- acceptance ---- */

typedef void (*ndl_acceptance_callback)(int id, int pass, const char* line, void* user);

/* Runs the listed criteria (all 16 when count is 0) and reports each line. */
NDL_API ndl_status ndl_acceptance_run(const int* ids, size_t count, uint64_t seed, ndl_acceptance_callback cb,
                                      void* user, int* failed);
NDL_API uint64_t ndl_acceptance_default_seed(void);

#ifdef __cplusplus
}
#endif

#endif /* NDL_NDL_H */
