#include "optimizer.hpp"

#include "error.hpp"
#include "performance.hpp"
#include "solver.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <sstream>
#include <thread>

namespace retrialq {

namespace {

Evaluation solve_one(const SystemConfig& cfg) {
  Evaluation ev;
  ev.c = cfg.c;
  ev.g = cfg.g;
  try {
    const StationaryDistribution dist = stationary(cfg);
    ev.P_b1 = blocking_primary(dist, cfg).customer;
    ev.P_b2 = blocking_priority(dist, cfg).customer;
    ev.captured_mass = dist.captured_mass;
    ev.solved = true;
  } catch (const Error& e) {
    ev.status = static_cast<int>(e.status());
    ev.note = e.what();
  }
  return ev;
}

void run_parallel(size_t n, int threads, const std::function<void(size_t)>& job) {
  unsigned hw = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
  hw = std::max(1u, std::min<unsigned>(hw, static_cast<unsigned>(n)));
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < n; k = next++) job(k);
  };
  if (hw == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < hw; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

bool check_monotone(const std::vector<Evaluation>& evs) {
  for (size_t k = 1; k < evs.size(); ++k)
    if (evs[k - 1].solved && evs[k].solved && evs[k].P_b2 < evs[k - 1].P_b2 - 1e-12) return false;
  return true;
}

}  // namespace

Evaluation EvaluationCache::get(const SystemConfig& config) {
  const std::string key = fingerprint(config);
  {
    std::lock_guard lock(mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  Evaluation ev = solve_one(config);
  std::lock_guard lock(mutex_);
  ++solves_;
  return memo_.emplace(key, ev).first->second;
}

size_t EvaluationCache::size() const {
  std::lock_guard lock(mutex_);
  return memo_.size();
}

size_t EvaluationCache::solves() const {
  std::lock_guard lock(mutex_);
  return solves_;
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::optimal: return "optimal";
    case Outcome::infeasible: return "infeasible";
    case Outcome::budget_exhausted: return "budget-exhausted";
  }
  return "unknown";
}

std::vector<Evaluation> evaluate_thresholds(const SystemConfig& base, int c, const OptimizerOptions& opt) {
  if (c < 2) throw Error(Status::argument, "c must be at least 2");
  EvaluationCache local;
  EvaluationCache& cache = opt.cache ? *opt.cache : local;
  std::vector<Evaluation> out(static_cast<size_t>(c - 1));
  run_parallel(out.size(), opt.threads, [&](size_t k) {
    SystemConfig cfg = base;
    cfg.c = c;
    cfg.g = static_cast<int>(k) + 1;
    out[k] = cache.get(cfg);
  });
  return out;
}

OptimizationResult optimize_g(const SystemConfig& base, int c, double p0, const OptimizerOptions& opt) {
  OptimizationResult res;
  res.p0 = p0;
  res.evaluations = evaluate_thresholds(base, c, opt);
  res.monotone = check_monotone(res.evaluations);
  std::vector<int>& feas = res.feasible[c];
  for (const Evaluation& ev : res.evaluations)
    if (ev.solved && ev.P_b2 <= p0) feas.push_back(ev.g);
  if (!feas.empty()) {
    res.outcome = Outcome::optimal;
    res.g_star = feas.back();
    res.c_star = c;
  } else {
    res.outcome = Outcome::infeasible;
    std::ostringstream os;
    int unsolved = 0;
    for (const Evaluation& ev : res.evaluations) unsolved += ev.solved ? 0 : 1;
    os << "no g in 1.." << c - 1 << " satisfies P_b2 <= " << p0;
    if (unsolved > 0) os << " (" << unsolved << " thresholds unstable or unsolved)";
    res.diagnostics = os.str();
  }
  return res;
}

OptimizationResult optimize_c(const SystemConfig& base, double p1, double p2, int c_max, int c_min,
                              const OptimizerOptions& opt) {
  if (c_min < 2 || c_max < c_min) throw Error(Status::argument, "need 2 <= c_min <= c_max");
  OptimizationResult res;
  res.p1 = p1;
  res.p2 = p2;
  for (int c = c_min; c <= c_max; ++c) {
    std::vector<Evaluation> evs = evaluate_thresholds(base, c, opt);
    res.monotone = res.monotone && check_monotone(evs);
    std::vector<int>& feas = res.feasible[c];
    for (const Evaluation& ev : evs)
      if (ev.solved && ev.P_b1 <= p1 && ev.P_b2 <= p2) feas.push_back(ev.g);
    res.evaluations.insert(res.evaluations.end(), evs.begin(), evs.end());
    if (!feas.empty()) {
      res.outcome = Outcome::optimal;
      res.c_star = c;
      res.g_star = feas.back();
      return res;
    }
  }
  res.outcome = Outcome::budget_exhausted;
  std::ostringstream os;
  os << "no c in " << c_min << ".." << c_max << " admits a feasible threshold";
  res.diagnostics = os.str();
  return res;
}

}  // namespace retrialq
