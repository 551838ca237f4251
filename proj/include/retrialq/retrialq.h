#ifndef RETRIALQ_RETRIALQ_H
#define RETRIALQ_RETRIALQ_H

/*
 * C interface to the retrialq solver.
 *
 * Objects are opaque handles created by rq_*_create/load/solve functions and
 * released with the matching rq_*_free. Every fallible call returns an
 * rq_status; on failure, rq_last_error() describes the problem for the
 * calling thread until its next call into the library.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RETRIALQ_BUILDING)
#    define RQ_API __declspec(dllexport)
#  else
#    define RQ_API __declspec(dllimport)
#  endif
#else
#  define RQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rq_status {
  RQ_OK = 0,
  RQ_INVALID_CONFIG = 1,
  RQ_UNSTABLE = 2,
  RQ_CONVERGENCE = 3,
  RQ_BUDGET = 4,
  RQ_IO = 5,
  RQ_ARGUMENT = 6,
  RQ_INTERNAL = 7
} rq_status;

typedef struct rq_config rq_config;
typedef struct rq_solution rq_solution;
typedef struct rq_simulation rq_simulation;
typedef struct rq_optimum rq_optimum;

RQ_API const char* rq_version(void);
RQ_API const char* rq_last_error(void);
RQ_API const char* rq_status_name(rq_status status);

/* Configuration. */
RQ_API rq_status rq_config_load(const char* path, rq_config** out);
RQ_API rq_status rq_config_parse(const char* json_text, rq_config** out);
RQ_API rq_status rq_config_clone(const rq_config* config, rq_config** out);
RQ_API void rq_config_free(rq_config* config);
/* Names: c, g, lambda_o, lambda_h, lambda_r, epsilon, epsilon0, N_max, max_iter. */
RQ_API rq_status rq_config_set(rq_config* config, const char* name, double value);
RQ_API rq_status rq_config_get(const rq_config* config, const char* name, double* value);
/* Writes one violation per line into buf (truncated to len); RQ_INVALID_CONFIG if any. */
RQ_API rq_status rq_config_validate(const rq_config* config, char* buf, size_t len, size_t* count);
/* Canonical JSON of the configuration; *needed receives the full length plus one. */
RQ_API rq_status rq_config_to_json(const rq_config* config, char* buf, size_t len, size_t* needed);
RQ_API rq_status rq_config_fingerprint(const rq_config* config, char* buf, size_t len);
/* The sweep block of the file, if any: *count = 0 when absent. */
RQ_API rq_status rq_config_sweep(const rq_config* config, char* param, size_t param_len, double* values,
                                 size_t capacity, size_t* count);

typedef struct rq_sim_defaults {
  double horizon;
  int replications;
  uint64_t seed;
  int grid_levels;
} rq_sim_defaults;
RQ_API rq_status rq_config_simulation(const rq_config* config, rq_sim_defaults* out);

/* Rates and stability. */
typedef struct rq_rates {
  double lambda1, lambda2;
  double lambda_b1, lambda_b2;
  double sigma, mu;
} rq_rates;
RQ_API rq_status rq_rates_compute(const rq_config* config, rq_rates* out);

typedef struct rq_stability {
  double rho;
  double mu_bar_1, mu_bar_2;
  double lambda1, lambda2;
  int stable;
  int near_critical;
  int has_det_derivative;
  int det_sign;
  double det_log_abs;
} rq_stability;
/* with_det != 0 also evaluates the determinant-derivative sign (small chains only). */
RQ_API rq_status rq_stability_check(const rq_config* config, int with_det, rq_stability* out);

/* Stationary distribution. */
typedef struct rq_solution_info {
  int N;
  int c;
  int k0;
  int passes;
  int g_iterations;
  double captured_mass;
  double tail_estimate;
  double g_residual;
  double seconds;
  double epsilon, epsilon0;
  int N_max;
} rq_solution_info;

RQ_API rq_status rq_solve(const rq_config* config, rq_solution** out);
RQ_API void rq_solution_free(rq_solution* solution);
RQ_API rq_status rq_solution_info_get(const rq_solution* solution, rq_solution_info* out);
RQ_API rq_status rq_solution_joint(const rq_solution* solution, int level, int busy, double* out);

typedef struct rq_measures {
  double L_b, L_orb, L_orb_tail_bound, L_s;
  double P_b1, P_b1_min_form, P_bb1;
  double P_b2, P_b2_min_form, P_bb2;
  double E_B;
  double P00;
  double captured_mass;
} rq_measures;
RQ_API rq_status rq_measures_compute(const rq_solution* solution, const rq_config* config, rq_measures* out);

/* Simulation. */
typedef struct rq_interval {
  double mean;
  double half_width;
} rq_interval;

typedef struct rq_sim_options {
  double horizon;
  int replications;
  uint64_t seed;
  int grid_levels;
  int threads;
} rq_sim_options;

typedef struct rq_sim_summary {
  rq_interval L_b, L_orb, P_b1, P_b2, P_bb1, P_bb2;
  int replications;
  int grid_levels;
  int c;
  int drift;
} rq_sim_summary;

RQ_API rq_sim_options rq_sim_options_default(void);
RQ_API rq_status rq_simulate(const rq_config* config, const rq_sim_options* options, rq_simulation** out);
RQ_API void rq_simulation_free(rq_simulation* simulation);
RQ_API rq_status rq_simulation_summary(const rq_simulation* simulation, rq_sim_summary* out);
RQ_API rq_status rq_simulation_joint(const rq_simulation* simulation, int level, int busy, rq_interval* out);

/* Guard-threshold and server-count optimization. */
typedef enum rq_outcome { RQ_OPTIMAL = 0, RQ_INFEASIBLE = 1, RQ_BUDGET_EXHAUSTED = 2 } rq_outcome;

typedef struct rq_evaluation {
  int c, g;
  int solved;
  int status;
  double P_b1, P_b2;
} rq_evaluation;

RQ_API rq_status rq_optimize_g(const rq_config* config, int c, double p0, int threads, rq_optimum** out);
RQ_API rq_status rq_optimize_c(const rq_config* config, double p1, double p2, int c_max, int threads,
                               rq_optimum** out);
RQ_API void rq_optimum_free(rq_optimum* optimum);
RQ_API rq_status rq_optimum_result(const rq_optimum* optimum, rq_outcome* outcome, int* c_star, int* g_star);
RQ_API size_t rq_optimum_count(const rq_optimum* optimum);
RQ_API rq_status rq_optimum_evaluation(const rq_optimum* optimum, size_t k, rq_evaluation* out);

/* Parameter sweep; rows are written in grid order. */
typedef struct rq_sweep_row {
  double param;
  int status;
  double L_orb, P_b1, P_b2, L_b, rho;
  double captured_mass;
} rq_sweep_row;
RQ_API rq_status rq_sweep(const rq_config* config, const char* param, const double* values, size_t count,
                          int threads, rq_sweep_row* rows);

/* Lowercase hex SHA-256 of data into out (65 bytes including the terminator). */
RQ_API rq_status rq_sha256_hex(const void* data, size_t len, char out[65]);

#ifdef __cplusplus
}
#endif

#endif
