#pragma once

#include "models.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace retrialq {

// Outgoing transitions of one phase of a marked Markov process. A transition
// with batch 0 is hidden; batch k > 0 marks an event of size k.
struct PhaseJump {
  double cumulative = 0;  // running sum of rates up to and including this jump
  int target = 0;
  int batch = 0;
};

class PhaseTable {
 public:
  PhaseTable() = default;
  static PhaseTable from_bmap(const BmapSpec& bmap);
  // Marks are the retrial events (diagonal of T1, batch 1); rates scale with the orbit.
  static PhaseTable from_mmpp_hidden(const MmppSpec& mmpp);
  // Batch 1 marks absorption (service completion) with target -1.
  static PhaseTable from_ph(const PhSpec& ph);

  int order() const { return static_cast<int>(rows_.size()); }
  double total(int phase) const { return rows_[phase].empty() ? 0.0 : rows_[phase].back().cumulative; }
  const PhaseJump& pick(int phase, double u) const;

 private:
  std::vector<std::vector<PhaseJump>> rows_;
};

int sample_initial(const RowVec& alpha, double u);
double sample_ph(const PhSpec& ph, const PhaseTable& table, std::mt19937_64& rng);

struct Interval {
  double mean = 0;
  double half_width = 0;
  bool contains(double x) const { return x >= mean - half_width && x <= mean + half_width; }
};

struct ClassCounts {
  std::uint64_t batches = 0;
  std::uint64_t arrived = 0;
  std::uint64_t admitted = 0;
  std::uint64_t orbited = 0;
  std::uint64_t batches_blocked = 0;  // batches with at least one customer sent to orbit
};

struct ReplicationResult {
  double L_b = 0, L_orb = 0, P_b1 = 0, P_b2 = 0, P_bb1 = 0, P_bb2 = 0;
  std::vector<double> joint;  // (levels + 1) x (c + 1), last level row pools the overflow
  ClassCounts primary, priority;
  std::uint64_t retrials = 0, retrials_admitted = 0, events = 0;
  int final_orbit = 0;
  double orbit_early = 0, orbit_late = 0;  // time-average orbit over the 2nd and 4th quarters
};

struct SimOptions {
  double horizon = 1e6;
  int replications = 20;
  std::uint64_t seed = 1;
  double warmup_fraction = 0.1;
  int grid_levels = 10;
  double confidence = 0.99;
  int threads = 0;  // 0 = hardware concurrency
};

struct SimEstimate {
  Interval L_b, L_orb, P_b1, P_b2, P_bb1, P_bb2;
  std::vector<Interval> joint;  // (grid_levels + 1) x (c + 1)
  int grid_levels = 0;
  int c = 0;
  int replications = 0;
  double horizon = 0;
  std::uint64_t seed = 0;
  bool drift = false;  // orbit grows across the run in most replications
  std::vector<ReplicationResult> runs;

  const Interval& P(int i, int b) const { return joint.at(static_cast<size_t>(i) * (c + 1) + b); }
};

ReplicationResult simulate_replication(const SystemConfig& config, const SimOptions& options,
                                       std::uint64_t stream);
SimEstimate simulate(const SystemConfig& config, const SimOptions& options = {});

// Two-sided Student-t confidence interval over per-replication values.
Interval t_interval(const std::vector<double>& samples, double confidence);

}  // namespace retrialq
