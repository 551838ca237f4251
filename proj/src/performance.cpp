#include "performance.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace retrialq {

namespace {

// Σ_i P_{i,b} collapsed onto one arrival-phase digit. `stride` is the number
// of flat positions per unit of that digit, `order` its range.
Vec phase_marginal(const StationaryDistribution& dist, int b, Eigen::Index stride, int order) {
  Vec out = Vec::Zero(order);
  const Eigen::Index off = dist.index.offset(b), n = dist.index.size(b);
  for (const RowVec& level : dist.levels)
    for (Eigen::Index j = 0; j < n; ++j) out((j / stride) % order) += level(off + j);
  return out;
}

Blocking blocking(const StationaryDistribution& dist, const BmapSpec& bmap, int limit,
                  Eigen::Index base_stride, double lambda, double lambda_b) {
  const int order = bmap.order();
  const Vec e = Vec::Ones(order);
  double shortfall = 0, minform = 0, batch = 0;
  for (int n = 1; n <= limit; ++n) {
    const int b = limit - n;
    const Vec pi = phase_marginal(dist, b, base_stride * dist.index.phases(b), order);
    Vec weighted = Vec::Zero(order), accepted = Vec::Zero(order), whole = Vec::Zero(order);
    for (int k = 0; k <= n; ++k) weighted += static_cast<double>(k - n) * (bmap.at(k) * e);
    for (int k = 1; k <= bmap.max_batch(); ++k) accepted += static_cast<double>(std::min(k, n)) * (bmap.at(k) * e);
    for (int k = 1; k <= n; ++k) whole += bmap.at(k) * e;
    shortfall += pi.dot(weighted);
    minform += pi.dot(accepted);
    batch += pi.dot(whole);
  }
  return {1.0 - shortfall / lambda, 1.0 - minform / lambda, 1.0 - batch / lambda_b};
}

}  // namespace

double joint_pmf(const StationaryDistribution& dist, int i, int b) { return dist.joint(i, b); }

std::vector<double> orbit_marginal(const StationaryDistribution& dist) {
  std::vector<double> out;
  out.reserve(dist.levels.size());
  for (const RowVec& level : dist.levels) out.push_back(level.sum());
  return out;
}

std::vector<double> server_marginal(const StationaryDistribution& dist) {
  std::vector<double> out(dist.index.c() + 1, 0.0);
  for (int i = 0; i <= dist.N; ++i)
    for (int b = 0; b <= dist.index.c(); ++b) out[b] += dist.joint(i, b);
  return out;
}

Blocking blocking_primary(const StationaryDistribution& dist, const SystemConfig& config) {
  const Eigen::Index V = config.bmap2.order();
  return blocking(dist, config.bmap1, config.g, V, arrival_rate(config.bmap1),
                  batch_arrival_rate(config.bmap1));
}

Blocking blocking_priority(const StationaryDistribution& dist, const SystemConfig& config) {
  return blocking(dist, config.bmap2, config.c, 1, arrival_rate(config.bmap2),
                  batch_arrival_rate(config.bmap2));
}

Summary summary_measures(const StationaryDistribution& dist, const SystemConfig& config) {
  Summary s;
  const std::vector<double> srv = server_marginal(dist);
  for (size_t b = 1; b < srv.size(); ++b) s.L_b += static_cast<double>(b) * srv[b];
  const std::vector<double> orb = orbit_marginal(dist);
  for (size_t i = 1; i < orb.size(); ++i) s.L_orb += static_cast<double>(i) * orb[i];

  // Decay ratio of the last three levels, extrapolated geometrically.
  const size_t N = orb.size() - 1;
  if (N >= 2 && orb[N - 1] > 0 && orb[N - 2] > 0) {
    const double q = std::clamp(0.5 * (orb[N] / orb[N - 1] + orb[N - 1] / orb[N - 2]), 0.0, 0.999);
    const double m = orb[N], n = static_cast<double>(N);
    s.L_orb_tail = m * (n * q / (1 - q) + q / ((1 - q) * (1 - q)));
  }
  s.L_s = s.L_orb + s.L_b;
  const double p00 = dist.joint(0, 0);
  if (!(p00 > 0)) throw Error(Status::internal, "P(0,0) is zero; the mean busy period is undefined");
  s.E_B = (1.0 / p00 - 1.0) / (arrival_rate(config.bmap1) + arrival_rate(config.bmap2));
  return s;
}

PerformanceReport evaluate(const StationaryDistribution& dist, const SystemConfig& config) {
  PerformanceReport r;
  r.N = dist.N;
  r.c = dist.index.c();
  r.captured_mass = dist.captured_mass;
  r.joint.resize(static_cast<size_t>(r.N + 1) * (r.c + 1));
  for (int i = 0; i <= r.N; ++i)
    for (int b = 0; b <= r.c; ++b) r.joint[static_cast<size_t>(i) * (r.c + 1) + b] = dist.joint(i, b);
  r.orbit = orbit_marginal(dist);
  r.servers = server_marginal(dist);
  r.summary = summary_measures(dist, config);
  r.primary = blocking_primary(dist, config);
  r.priority = blocking_priority(dist, config);
  r.lambda1 = arrival_rate(config.bmap1);
  r.lambda2 = arrival_rate(config.bmap2);
  return r;
}

void write_key_values(std::ostream& os, const PerformanceReport& r) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(12);
  os << "N = " << r.N << '\n'
     << "captured_mass = " << r.captured_mass << '\n'
     << "L_b = " << r.summary.L_b << '\n'
     << "L_orb = " << r.summary.L_orb << '\n'
     << "L_orb_tail_bound = " << r.summary.L_orb_tail << '\n'
     << "L_s = " << r.summary.L_s << '\n'
     << "P_b1 = " << r.primary.customer << '\n'
     << "P_b1_min_form = " << r.primary.customer_min << '\n'
     << "P_bb1 = " << r.primary.batch << '\n'
     << "P_b2 = " << r.priority.customer << '\n'
     << "P_b2_min_form = " << r.priority.customer_min << '\n'
     << "P_bb2 = " << r.priority.batch << '\n'
     << "E_B = " << r.summary.E_B << '\n'
     << "P00 = " << r.P(0, 0) << '\n';
  os.flags(flags);
  os.precision(prec);
}

}  // namespace retrialq
