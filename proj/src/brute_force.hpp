#pragma once

#include "generator.hpp"
#include "solver.hpp"

namespace retrialq {

struct BruteForceOptions {
  int orbit_cap = 60;
  Eigen::Index max_states = 200000;
  Eigen::Index dense_limit = 3000;  // GTH elimination up to this many states, sparse LU above
};

// Stationary law of the chain with the orbit capped at orbit_cap; arrivals that
// would overflow the cap are suppressed, so the truncated generator stays
// conservative.
StationaryDistribution brute_force_ctmc(const SystemConfig& config, const BruteForceOptions& options = {});

// max_i ||(P Q)_i||_∞ of the level vectors against the generator truncated to
// their levels, without conservative redirection.
double balance_residual(const GeneratorView& gen, const std::vector<RowVec>& levels);

}  // namespace retrialq
