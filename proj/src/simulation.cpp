#include "simulation.hpp"

#include "error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace retrialq {

namespace {

void push_jump(std::vector<PhaseJump>& row, double rate, int target, int batch) {
  if (!(rate > 0)) return;
  const double prev = row.empty() ? 0.0 : row.back().cumulative;
  row.push_back({prev + rate, target, batch});
}

}  // namespace

PhaseTable PhaseTable::from_bmap(const BmapSpec& bmap) {
  PhaseTable t;
  const int n = bmap.order();
  t.rows_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (j != i) push_jump(t.rows_[i], bmap.D[0](i, j), j, 0);
    for (size_t k = 1; k < bmap.D.size(); ++k)
      for (int j = 0; j < n; ++j) push_jump(t.rows_[i], bmap.D[k](i, j), j, static_cast<int>(k));
  }
  return t;
}

PhaseTable PhaseTable::from_mmpp_hidden(const MmppSpec& mmpp) {
  PhaseTable t;
  const int n = mmpp.order();
  t.rows_.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) push_jump(t.rows_[i], mmpp.T0(i, j), j, 0);
  return t;
}

PhaseTable PhaseTable::from_ph(const PhSpec& ph) {
  PhaseTable t;
  const int n = ph.order();
  const Vec exit = ph.exit_rates();
  t.rows_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (j != i) push_jump(t.rows_[i], ph.S(i, j), j, 0);
    push_jump(t.rows_[i], exit(i), -1, 1);
  }
  return t;
}

const PhaseJump& PhaseTable::pick(int phase, double u) const {
  const auto& row = rows_[phase];
  const double x = u * row.back().cumulative;
  auto it = std::upper_bound(row.begin(), row.end(), x,
                             [](double v, const PhaseJump& j) { return v < j.cumulative; });
  return it == row.end() ? row.back() : *it;
}

int sample_initial(const RowVec& alpha, double u) {
  double acc = 0;
  for (Eigen::Index m = 0; m < alpha.size(); ++m) {
    acc += alpha(m);
    if (u < acc) return static_cast<int>(m);
  }
  return static_cast<int>(alpha.size() - 1);
}

double sample_ph(const PhSpec& ph, const PhaseTable& table, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  int m = sample_initial(ph.alpha, unif(rng));
  double t = 0;
  for (;;) {
    const double rate = table.total(m);
    t += expo(rng) / rate;
    const PhaseJump& j = table.pick(m, unif(rng));
    if (j.target < 0) return t;
    m = j.target;
  }
}

Interval t_interval(const std::vector<double>& samples, double confidence) {
  const size_t n = samples.size();
  Interval out;
  if (n == 0) return out;
  double mean = 0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(n);
  out.mean = mean;
  if (n < 2) {
    out.half_width = std::numeric_limits<double>::infinity();
    return out;
  }
  double ss = 0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  boost::math::students_t dist(static_cast<double>(n - 1));
  const double q = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  out.half_width = q * sd / std::sqrt(static_cast<double>(n));
  return out;
}

ReplicationResult simulate_replication(const SystemConfig& raw, const SimOptions& opt,
                                       std::uint64_t stream) {
  if (!(opt.horizon > 0) || !(opt.warmup_fraction >= 0 && opt.warmup_fraction < 1))
    throw Error(Status::argument, "simulation horizon must be positive and warm-up fraction in [0,1)");
  if (opt.grid_levels < 0) throw Error(Status::argument, "grid_levels must be nonnegative");
  const SystemConfig cfg = validated(raw);
  const int c = cfg.c, g = cfg.g, M = cfg.service.order();
  const PhaseTable mm = PhaseTable::from_mmpp_hidden(cfg.mmpp);
  const PhaseTable d1 = PhaseTable::from_bmap(cfg.bmap1);
  const PhaseTable d2 = PhaseTable::from_bmap(cfg.bmap2);
  const PhaseTable ph = PhaseTable::from_ph(cfg.service);
  std::vector<double> srate(M);
  for (int m = 0; m < M; ++m) srate[m] = ph.total(m);

  std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);

  // Initial phases drawn from the stationary laws of the arrival and retrial modulators.
  const RowVec th1 = stationary_vector(cfg.bmap1.sum());
  const RowVec th2 = stationary_vector(cfg.bmap2.sum());
  const RowVec th0 = stationary_vector(cfg.mmpp.T());
  int r = sample_initial(th0, unif(rng));
  int w = sample_initial(th1, unif(rng));
  int v = sample_initial(th2, unif(rng));
  long orbit = 0;
  int busy = 0;
  std::vector<int> cnt(M, 0);

  const int L = opt.grid_levels;
  ReplicationResult res;
  res.joint.assign(static_cast<size_t>(L + 1) * (c + 1), 0.0);
  const double warm = opt.warmup_fraction * opt.horizon;
  const double span = opt.horizon - warm;
  const double q2 = warm + 0.25 * span, q3 = warm + 0.5 * span, q4 = warm + 0.75 * span;
  double sum_b = 0, sum_n = 0, early = 0, late = 0;

  auto start_service = [&](int k) {
    for (int s = 0; s < k; ++s) ++cnt[sample_initial(cfg.service.alpha, unif(rng))];
    busy += k;
  };
  auto accumulate = [&](double t0, double t1) {
    const double a = std::max(t0, warm), b = std::min(t1, opt.horizon);
    if (b <= a) return;
    const double dt = b - a;
    sum_b += dt * busy;
    sum_n += dt * static_cast<double>(orbit);
    res.joint[static_cast<size_t>(std::min<long>(orbit, L)) * (c + 1) + busy] += dt;
    early += std::max(0.0, std::min(b, q3) - std::max(a, q2)) * static_cast<double>(orbit);
    late += std::max(0.0, b - std::max(a, q4)) * static_cast<double>(orbit);
  };

  double t = 0;
  while (t < opt.horizon) {
    const double a_mm = mm.total(r);
    const double a_ret = busy < g ? static_cast<double>(orbit) * cfg.mmpp.sigma(r) : 0.0;
    const double a_1 = d1.total(w);
    const double a_2 = d2.total(v);
    double a_s = 0;
    for (int m = 0; m < M; ++m) a_s += cnt[m] * srate[m];
    const double total = a_mm + a_ret + a_1 + a_2 + a_s;
    const double t_next = t + expo(rng) / total;
    accumulate(t, t_next);
    t = t_next;
    if (t >= opt.horizon) break;
    const bool counted = t >= warm;
    ++res.events;

    double x = unif(rng) * total;
    if (x < a_mm) {
      r = mm.pick(r, x / a_mm).target;
      continue;
    }
    x -= a_mm;
    if (x < a_ret) {
      --orbit;
      start_service(1);
      if (counted) ++res.retrials_admitted;
      continue;
    }
    x -= a_ret;
    if (x < a_1) {
      const PhaseJump& j = d1.pick(w, x / a_1);
      w = j.target;
      if (j.batch == 0) continue;
      const int adm = busy < g ? std::min(j.batch, g - busy) : 0;
      start_service(adm);
      orbit += j.batch - adm;
      if (counted) {
        ++res.primary.batches;
        res.primary.arrived += j.batch;
        res.primary.admitted += adm;
        res.primary.orbited += j.batch - adm;
        if (adm < j.batch) ++res.primary.batches_blocked;
      }
      continue;
    }
    x -= a_1;
    if (x < a_2) {
      const PhaseJump& j = d2.pick(v, x / a_2);
      v = j.target;
      if (j.batch == 0) continue;
      const int adm = std::min(j.batch, c - busy);
      start_service(adm);
      orbit += j.batch - adm;
      if (counted) {
        ++res.priority.batches;
        res.priority.arrived += j.batch;
        res.priority.admitted += adm;
        res.priority.orbited += j.batch - adm;
        if (adm < j.batch) ++res.priority.batches_blocked;
      }
      continue;
    }
    x -= a_2;
    int m = 0;
    for (; m < M - 1; ++m) {
      const double rm = cnt[m] * srate[m];
      if (x < rm) break;
      x -= rm;
    }
    const PhaseJump& j = ph.pick(m, unif(rng));
    --cnt[m];
    if (j.target < 0) {
      --busy;
    } else {
      ++cnt[j.target];
    }
  }

  for (double& p : res.joint) p /= span;
  res.L_b = sum_b / span;
  res.L_orb = sum_n / span;
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  res.P_b1 = ratio(res.primary.orbited, res.primary.arrived);
  res.P_b2 = ratio(res.priority.orbited, res.priority.arrived);
  res.P_bb1 = ratio(res.primary.batches_blocked, res.primary.batches);
  res.P_bb2 = ratio(res.priority.batches_blocked, res.priority.batches);
  res.final_orbit = static_cast<int>(std::min<long>(orbit, std::numeric_limits<int>::max()));
  res.orbit_early = early / (0.25 * span);
  res.orbit_late = late / (0.25 * span);
  return res;
}

SimEstimate simulate(const SystemConfig& config, const SimOptions& opt) {
  if (opt.replications < 2) throw Error(Status::argument, "a confidence interval needs at least two replications");
  if (!(opt.confidence > 0 && opt.confidence < 1))
    throw Error(Status::argument, "confidence level must lie in (0,1)");
  const SystemConfig cfg = validated(config);
  SimEstimate est;
  est.c = cfg.c;
  est.grid_levels = opt.grid_levels;
  est.replications = opt.replications;
  est.horizon = opt.horizon;
  est.seed = opt.seed;
  est.runs.resize(opt.replications);

  // Each replication writes only its own slot, so the merge below is order-independent.
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int k = next++; k < opt.replications; k = next++) {
      try {
        est.runs[k] = simulate_replication(cfg, opt, static_cast<std::uint64_t>(k));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned hw = opt.threads > 0 ? static_cast<unsigned>(opt.threads) : std::thread::hardware_concurrency();
  hw = std::max(1u, std::min<unsigned>(hw, static_cast<unsigned>(opt.replications)));
  if (hw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < hw; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  auto collect = [&](auto field) {
    std::vector<double> xs;
    xs.reserve(est.runs.size());
    for (const auto& r : est.runs) xs.push_back(field(r));
    return t_interval(xs, opt.confidence);
  };
  est.L_b = collect([](const ReplicationResult& r) { return r.L_b; });
  est.L_orb = collect([](const ReplicationResult& r) { return r.L_orb; });
  est.P_b1 = collect([](const ReplicationResult& r) { return r.P_b1; });
  est.P_b2 = collect([](const ReplicationResult& r) { return r.P_b2; });
  est.P_bb1 = collect([](const ReplicationResult& r) { return r.P_bb1; });
  est.P_bb2 = collect([](const ReplicationResult& r) { return r.P_bb2; });
  const size_t cells = static_cast<size_t>(opt.grid_levels + 1) * (cfg.c + 1);
  est.joint.resize(cells);
  for (size_t k = 0; k < cells; ++k)
    est.joint[k] = collect([k](const ReplicationResult& r) { return r.joint[k]; });

  int growing = 0;
  for (const auto& r : est.runs)
    if (r.orbit_late > 2.0 * r.orbit_early + 10.0) ++growing;
  est.drift = 2 * growing > opt.replications;
  return est;
}

}  // namespace retrialq
