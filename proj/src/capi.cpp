#include "retrialq/retrialq.h"

#include "config_io.hpp"
#include "ergodicity.hpp"
#include "error.hpp"
#include "generator.hpp"
#include "optimizer.hpp"
#include "performance.hpp"
#include "simulation.hpp"
#include "solver.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>

struct rq_config {
  retrialq::ConfigFile file;
};

struct rq_solution {
  retrialq::StationaryDistribution dist;
};

struct rq_simulation {
  retrialq::SimEstimate est;
};

struct rq_optimum {
  retrialq::OptimizationResult result;
};

namespace {

thread_local std::string last_error;

template <class F>
rq_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return RQ_OK;
  } catch (const retrialq::Error& e) {
    last_error = e.what();
    return static_cast<rq_status>(e.status());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RQ_BUDGET;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RQ_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return RQ_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw retrialq::Error(retrialq::Status::argument, what);
}

// Copies s into buf, truncating; returns s.size() + 1.
size_t copy_out(const std::string& s, char* buf, size_t len) {
  if (buf && len > 0) {
    const size_t n = std::min(s.size(), len - 1);
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  return s.size() + 1;
}

rq_interval interval(const retrialq::Interval& i) { return {i.mean, i.half_width}; }

}  // namespace

extern "C" {

const char* rq_version(void) { return RETRIALQ_VERSION_STRING; }

const char* rq_last_error(void) { return last_error.c_str(); }

const char* rq_status_name(rq_status status) {
  switch (status) {
    case RQ_OK: return "ok";
    case RQ_INVALID_CONFIG: return "invalid-config";
    case RQ_UNSTABLE: return "unstable";
    case RQ_CONVERGENCE: return "convergence";
    case RQ_BUDGET: return "budget";
    case RQ_IO: return "io";
    case RQ_ARGUMENT: return "argument";
    case RQ_INTERNAL: return "internal";
  }
  return "unknown";
}

rq_status rq_config_load(const char* path, rq_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    auto cfg = std::make_unique<rq_config>();
    cfg->file = retrialq::load_config(path);
    *out = cfg.release();
  });
}

rq_status rq_config_parse(const char* json_text, rq_config** out) {
  return guarded([&] {
    require(json_text && out, "null argument");
    *out = nullptr;
    auto cfg = std::make_unique<rq_config>();
    cfg->file = retrialq::parse_config(json_text);
    *out = cfg.release();
  });
}

rq_status rq_config_clone(const rq_config* config, rq_config** out) {
  return guarded([&] {
    require(config && out, "null argument");
    *out = new rq_config(*config);
  });
}

void rq_config_free(rq_config* config) { delete config; }

rq_status rq_config_set(rq_config* config, const char* name, double value) {
  return guarded([&] {
    require(config && name, "null argument");
    retrialq::set_param(config->file, name, value);
  });
}

rq_status rq_config_get(const rq_config* config, const char* name, double* value) {
  return guarded([&] {
    require(config && name && value, "null argument");
    *value = retrialq::get_param(config->file, name);
  });
}

rq_status rq_config_validate(const rq_config* config, char* buf, size_t len, size_t* count) {
  std::vector<retrialq::Violation> found;
  const rq_status st = guarded([&] {
    require(config != nullptr, "null argument");
    found = retrialq::validate(config->file.materialize());
    std::ostringstream os;
    for (const auto& v : found) os << retrialq::to_string(v) << '\n';
    copy_out(os.str(), buf, len);
    if (count) *count = found.size();
  });
  if (st != RQ_OK) return st;
  if (!found.empty()) {
    last_error = retrialq::to_string(found.front());
    return RQ_INVALID_CONFIG;
  }
  return RQ_OK;
}

rq_status rq_config_to_json(const rq_config* config, char* buf, size_t len, size_t* needed) {
  return guarded([&] {
    require(config != nullptr, "null argument");
    const size_t n = copy_out(retrialq::to_json(config->file), buf, len);
    if (needed) *needed = n;
  });
}

rq_status rq_config_fingerprint(const rq_config* config, char* buf, size_t len) {
  return guarded([&] {
    require(config && buf && len > 0, "null argument");
    copy_out(retrialq::fingerprint(config->file.materialize()), buf, len);
  });
}

rq_status rq_config_sweep(const rq_config* config, char* param, size_t param_len, double* values,
                          size_t capacity, size_t* count) {
  return guarded([&] {
    require(config && count, "null argument");
    const auto& sw = config->file.sweep;
    *count = sw ? sw->values.size() : 0;
    if (!sw) {
      copy_out("", param, param_len);
      return;
    }
    copy_out(sw->param, param, param_len);
    if (values)
      std::copy_n(sw->values.begin(), std::min(capacity, sw->values.size()), values);
  });
}

rq_status rq_config_simulation(const rq_config* config, rq_sim_defaults* out) {
  return guarded([&] {
    require(config && out, "null argument");
    const auto& s = config->file.sim;
    *out = {s.horizon, s.replications, s.seed, s.grid_levels};
  });
}

rq_status rq_rates_compute(const rq_config* config, rq_rates* out) {
  return guarded([&] {
    require(config && out, "null argument");
    const auto r = retrialq::rates(retrialq::validated(config->file.materialize()));
    *out = {r.lambda1, r.lambda2, r.lambda_b1, r.lambda_b2, r.sigma, r.mu};
  });
}

rq_status rq_stability_check(const rq_config* config, int with_det, rq_stability* out) {
  return guarded([&] {
    require(config && out, "null argument");
    const auto cfg = config->file.materialize();
    const auto rep = retrialq::stability_check(cfg);
    *out = {};
    out->rho = rep.rho;
    out->mu_bar_1 = rep.mu_bar_1;
    out->mu_bar_2 = rep.mu_bar_2;
    out->lambda1 = rep.lambda1;
    out->lambda2 = rep.lambda2;
    out->stable = rep.stable ? 1 : 0;
    out->near_critical = rep.near_critical ? 1 : 0;
    if (with_det) {
      const auto d = retrialq::det_derivative_check(retrialq::build_generator(cfg));
      out->has_det_derivative = 1;
      out->det_sign = d.sign;
      out->det_log_abs = d.log_abs;
    }
  });
}

rq_status rq_solve(const rq_config* config, rq_solution** out) {
  return guarded([&] {
    require(config && out, "null argument");
    *out = nullptr;
    auto sol = std::make_unique<rq_solution>();
    sol->dist = retrialq::stationary(config->file.materialize());
    *out = sol.release();
  });
}

void rq_solution_free(rq_solution* solution) { delete solution; }

rq_status rq_solution_info_get(const rq_solution* solution, rq_solution_info* out) {
  return guarded([&] {
    require(solution && out, "null argument");
    const auto& d = solution->dist;
    *out = {};
    out->N = d.N;
    out->c = d.index.c();
    out->k0 = d.k0;
    out->passes = d.passes;
    out->g_iterations = d.g_iterations;
    out->captured_mass = d.captured_mass;
    out->tail_estimate = d.tail_estimate;
    out->g_residual = d.g_residual;
    out->seconds = d.seconds;
    out->epsilon = d.tol.epsilon;
    out->epsilon0 = d.tol.epsilon0;
    out->N_max = d.tol.N_max;
  });
}

rq_status rq_solution_joint(const rq_solution* solution, int level, int busy, double* out) {
  return guarded([&] {
    require(solution && out, "null argument");
    *out = solution->dist.joint(level, busy);
  });
}

rq_status rq_measures_compute(const rq_solution* solution, const rq_config* config, rq_measures* out) {
  return guarded([&] {
    require(solution && config && out, "null argument");
    const auto cfg = retrialq::validated(config->file.materialize());
    const auto r = retrialq::evaluate(solution->dist, cfg);
    *out = {};
    out->L_b = r.summary.L_b;
    out->L_orb = r.summary.L_orb;
    out->L_orb_tail_bound = r.summary.L_orb_tail;
    out->L_s = r.summary.L_s;
    out->P_b1 = r.primary.customer;
    out->P_b1_min_form = r.primary.customer_min;
    out->P_bb1 = r.primary.batch;
    out->P_b2 = r.priority.customer;
    out->P_b2_min_form = r.priority.customer_min;
    out->P_bb2 = r.priority.batch;
    out->E_B = r.summary.E_B;
    out->P00 = r.P(0, 0);
    out->captured_mass = r.captured_mass;
  });
}

rq_sim_options rq_sim_options_default(void) {
  const retrialq::SimOptions d;
  return {d.horizon, d.replications, d.seed, d.grid_levels, d.threads};
}

rq_status rq_simulate(const rq_config* config, const rq_sim_options* options, rq_simulation** out) {
  return guarded([&] {
    require(config && options && out, "null argument");
    *out = nullptr;
    retrialq::SimOptions o;
    o.horizon = options->horizon;
    o.replications = options->replications;
    o.seed = options->seed;
    o.grid_levels = options->grid_levels;
    o.threads = options->threads;
    auto sim = std::make_unique<rq_simulation>();
    sim->est = retrialq::simulate(config->file.materialize(), o);
    *out = sim.release();
  });
}

void rq_simulation_free(rq_simulation* simulation) { delete simulation; }

rq_status rq_simulation_summary(const rq_simulation* simulation, rq_sim_summary* out) {
  return guarded([&] {
    require(simulation && out, "null argument");
    const auto& e = simulation->est;
    *out = {};
    out->L_b = interval(e.L_b);
    out->L_orb = interval(e.L_orb);
    out->P_b1 = interval(e.P_b1);
    out->P_b2 = interval(e.P_b2);
    out->P_bb1 = interval(e.P_bb1);
    out->P_bb2 = interval(e.P_bb2);
    out->replications = e.replications;
    out->grid_levels = e.grid_levels;
    out->c = e.c;
    out->drift = e.drift ? 1 : 0;
  });
}

rq_status rq_simulation_joint(const rq_simulation* simulation, int level, int busy, rq_interval* out) {
  return guarded([&] {
    require(simulation && out, "null argument");
    const auto& e = simulation->est;
    require(level >= 0 && level <= e.grid_levels && busy >= 0 && busy <= e.c, "index out of range");
    *out = interval(e.P(level, busy));
  });
}

rq_status rq_optimize_g(const rq_config* config, int c, double p0, int threads, rq_optimum** out) {
  return guarded([&] {
    require(config && out, "null argument");
    *out = nullptr;
    retrialq::OptimizerOptions o;
    o.threads = threads;
    auto opt = std::make_unique<rq_optimum>();
    opt->result = retrialq::optimize_g(config->file.materialize(), c, p0, o);
    *out = opt.release();
  });
}

rq_status rq_optimize_c(const rq_config* config, double p1, double p2, int c_max, int threads,
                        rq_optimum** out) {
  return guarded([&] {
    require(config && out, "null argument");
    *out = nullptr;
    retrialq::OptimizerOptions o;
    o.threads = threads;
    auto opt = std::make_unique<rq_optimum>();
    opt->result = retrialq::optimize_c(config->file.materialize(), p1, p2, c_max, 2, o);
    *out = opt.release();
  });
}

void rq_optimum_free(rq_optimum* optimum) { delete optimum; }

rq_status rq_optimum_result(const rq_optimum* optimum, rq_outcome* outcome, int* c_star, int* g_star) {
  return guarded([&] {
    require(optimum != nullptr, "null argument");
    const auto& r = optimum->result;
    if (outcome) *outcome = static_cast<rq_outcome>(r.outcome);
    if (c_star) *c_star = r.c_star;
    if (g_star) *g_star = r.g_star;
  });
}

size_t rq_optimum_count(const rq_optimum* optimum) { return optimum ? optimum->result.evaluations.size() : 0; }

rq_status rq_optimum_evaluation(const rq_optimum* optimum, size_t k, rq_evaluation* out) {
  return guarded([&] {
    require(optimum && out, "null argument");
    require(k < optimum->result.evaluations.size(), "evaluation index out of range");
    const auto& e = optimum->result.evaluations[k];
    *out = {e.c, e.g, e.solved ? 1 : 0, e.status, e.P_b1, e.P_b2};
  });
}

rq_status rq_sweep(const rq_config* config, const char* param, const double* values, size_t count,
                   int threads, rq_sweep_row* rows) {
  return guarded([&] {
    require(config && param && (count == 0 || (values && rows)), "null argument");
    retrialq::SweepSpec sw{param, std::vector<double>(values, values + count)};
    retrialq::get_param(config->file, sw.param);  // rejects unknown names up front
    const auto result = retrialq::run_sweep(config->file, sw, threads);
    for (size_t k = 0; k < count; ++k) {
      const auto& r = result[k];
      rows[k] = {r.param, r.status, r.L_orb, r.P_b1, r.P_b2, r.L_b, r.rho, r.captured_mass};
    }
  });
}

rq_status rq_sha256_hex(const void* data, size_t len, char out[65]) {
  return guarded([&] {
    require((data || len == 0) && out, "null argument");
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    if (EVP_Digest(data, len, md, &n, EVP_sha256(), nullptr) != 1 || n != 32)
      throw retrialq::Error(retrialq::Status::internal, "SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    for (unsigned i = 0; i < n; ++i) {
      out[2 * i] = hex[md[i] >> 4];
      out[2 * i + 1] = hex[md[i] & 15];
    }
    out[64] = '\0';
  });
}

}  // extern "C"
