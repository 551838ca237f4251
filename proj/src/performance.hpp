#pragma once

#include "models.hpp"
#include "solver.hpp"

#include <iosfwd>
#include <vector>

namespace retrialq {

double joint_pmf(const StationaryDistribution& dist, int i, int b);
std::vector<double> orbit_marginal(const StationaryDistribution& dist);
std::vector<double> server_marginal(const StationaryDistribution& dist);

// Blocking measures for one class. `customer` is the weighted (k - n) form,
// `customer_min` the accepted-rate form with min(k, n); they agree whenever
// the batch matrices sum to a conservative generator.
struct Blocking {
  double customer = 0;
  double customer_min = 0;
  double batch = 0;
};

Blocking blocking_primary(const StationaryDistribution& dist, const SystemConfig& config);
Blocking blocking_priority(const StationaryDistribution& dist, const SystemConfig& config);

struct Summary {
  double L_b = 0;
  double L_orb = 0;
  double L_orb_tail = 0;  // geometric extrapolation of the orbit mean beyond level N
  double L_s = 0;
  double E_B = 0;
};

Summary summary_measures(const StationaryDistribution& dist, const SystemConfig& config);

struct PerformanceReport {
  int N = 0, c = 0;
  double captured_mass = 0;
  std::vector<double> joint;  // (N + 1) x (c + 1)
  std::vector<double> orbit, servers;
  Summary summary;
  Blocking primary, priority;
  double lambda1 = 0, lambda2 = 0;

  double P(int i, int b) const { return joint.at(static_cast<size_t>(i) * (c + 1) + b); }
};

PerformanceReport evaluate(const StationaryDistribution& dist, const SystemConfig& config);

// One `key = value` line per scalar measure.
void write_key_values(std::ostream& os, const PerformanceReport& report);

}  // namespace retrialq
