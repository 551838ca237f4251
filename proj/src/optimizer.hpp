#pragma once

#include "models.hpp"

#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace retrialq {

struct Evaluation {
  int c = 0, g = 0;
  bool solved = false;  // false when the instance is unstable or the solve failed
  int status = 0;       // Status code of the failed solve, 0 on success
  double P_b1 = 0, P_b2 = 0;
  double captured_mass = 0;
  std::string note;
};

// Thread-safe memo of solved instances keyed by configuration fingerprint.
class EvaluationCache {
 public:
  Evaluation get(const SystemConfig& config);
  size_t size() const;
  size_t solves() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Evaluation> memo_;
  size_t solves_ = 0;
};

enum class Outcome { optimal, infeasible, budget_exhausted };
const char* to_string(Outcome outcome);

struct OptimizationResult {
  Outcome outcome = Outcome::infeasible;
  int g_star = -1;
  int c_star = -1;
  double p0 = 0, p1 = 0, p2 = 0;
  std::vector<Evaluation> evaluations;       // sorted by (c, g)
  std::map<int, std::vector<int>> feasible;  // c -> feasible g, ascending
  bool monotone = true;  // P_b2 nondecreasing in g on every scanned c
  std::string diagnostics;
};

struct OptimizerOptions {
  int threads = 0;  // 0 = hardware concurrency
  EvaluationCache* cache = nullptr;
};

// Evaluates every g in 1..c-1 of `base` with c replaced.
std::vector<Evaluation> evaluate_thresholds(const SystemConfig& base, int c, const OptimizerOptions& options);

// g* = max{g : P_b2(g) <= p0}.
OptimizationResult optimize_g(const SystemConfig& base, int c, double p0, const OptimizerOptions& options = {});

// Smallest c in c_min..c_max whose set {g : P_b1 <= p1, P_b2 <= p2} is nonempty;
// the witness is its largest member.
OptimizationResult optimize_c(const SystemConfig& base, double p1, double p2, int c_max, int c_min = 2,
                              const OptimizerOptions& options = {});

}  // namespace retrialq
