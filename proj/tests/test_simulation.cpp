#include "brute_force.hpp"
#include "doctest.h"
#include "error.hpp"
#include "fixtures.hpp"
#include "performance.hpp"
#include "simulation.hpp"

#include <cmath>

using namespace retrialq;

TEST_CASE("t interval matches tabulated quantiles") {
  const Interval i = t_interval({1.0, 2.0, 3.0}, 0.99);
  CHECK(i.mean == doctest::Approx(2.0));
  // t_{0.995, 2} = 9.92484
  CHECK(i.half_width == doctest::Approx(9.92484 / std::sqrt(3.0)).epsilon(1e-5));
  CHECK(std::isinf(t_interval({1.0}, 0.99).half_width));
  CHECK(i.contains(2.0));
  CHECK_FALSE(i.contains(10.0));
}

TEST_CASE("PH samples reproduce the mean service time") {
  const SystemConfig cfg = fixtures::cellular(4, 3, 1, 1, 1);
  const PhaseTable table = PhaseTable::from_ph(cfg.service);
  std::mt19937_64 rng(99);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int k = 0; k < n; ++k) {
    const double x = sample_ph(cfg.service, table, rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0 / 8.1288) < 3 * se + 1e-5);
}

TEST_CASE("BMAP event tables reproduce arrival and batch rates") {
  std::mt19937_64 draw(4);
  const SystemConfig cfg = fixtures::random_small(draw, 3, 1, 1, 3);
  const BmapSpec& b = cfg.bmap1;
  const PhaseTable t = PhaseTable::from_bmap(b);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> e(1.0);
  int phase = 0;
  const double horizon = 2e5;
  const int bins = 20;
  std::vector<double> cust(bins, 0), bat(bins, 0);
  double now = 0;
  while (true) {
    now += e(rng) / t.total(phase);
    if (now >= horizon) break;
    const PhaseJump& j = t.pick(phase, u(rng));
    phase = j.target;
    if (j.batch > 0) {
      const size_t k = static_cast<size_t>(now / (horizon / bins));
      cust[k] += j.batch;
      bat[k] += 1;
    }
  }
  auto check_rate = [&](const std::vector<double>& counts, double expected) {
    std::vector<double> rates;
    for (double c : counts) rates.push_back(c / (horizon / bins));
    double m = 0, v = 0;
    for (double r : rates) m += r;
    m /= bins;
    for (double r : rates) v += (r - m) * (r - m);
    const double se = std::sqrt(v / (bins - 1) / bins);
    CHECK(std::abs(m - expected) < 3 * se);
  };
  check_rate(cust, arrival_rate(b));
  check_rate(bat, batch_arrival_rate(b));
}

TEST_CASE("flow balance holds per replication") {
  SimOptions o;
  o.horizon = 5e3;
  o.replications = 3;
  o.seed = 5;
  std::mt19937_64 rng(8);
  const SimEstimate est = simulate(fixtures::random_small(rng, 4, 2, 2, 3), o);
  for (const ReplicationResult& r : est.runs) {
    CHECK(r.primary.admitted + r.primary.orbited == r.primary.arrived);
    CHECK(r.priority.admitted + r.priority.orbited == r.priority.arrived);
    CHECK(r.primary.batches_blocked <= r.primary.batches);
    CHECK(r.events > 0);
  }
}

TEST_CASE("simulation agrees with the brute-force chain") {
  const SystemConfig cfg = fixtures::scalar(3, 2, 0.6, 0.4, 1.5, 1.0);
  SimOptions o;
  o.horizon = 2e5;
  o.replications = 10;
  o.seed = 2024;
  o.grid_levels = 4;
  const SimEstimate est = simulate(cfg, o);
  BruteForceOptions bo;
  bo.orbit_cap = 80;
  const StationaryDistribution exact = brute_force_ctmc(cfg, bo);
  const std::vector<double> srv = server_marginal(exact);
  for (int b = 0; b <= 3; ++b) {
    std::vector<double> xs;
    for (const ReplicationResult& r : est.runs) {
      double s = 0;
      for (int i = 0; i <= o.grid_levels; ++i) s += r.joint[static_cast<size_t>(i) * 4 + b];
      xs.push_back(s);
    }
    const Interval iv = t_interval(xs, 0.99);
    INFO("b=" << b << " sim=" << iv.mean << "+-" << iv.half_width << " exact=" << srv[b]);
    CHECK(iv.contains(srv[b]));
  }
  const PerformanceReport rep = evaluate(exact, cfg);
  CHECK(est.L_b.contains(rep.summary.L_b));
  CHECK(est.P_b1.contains(rep.primary.customer));
}

TEST_CASE("confidence intervals narrow with more replications") {
  const SystemConfig cfg = fixtures::scalar(3, 2, 0.6, 0.4, 1.5, 1.0);
  SimOptions o;
  o.horizon = 2e4;
  o.seed = 1;
  o.replications = 4;
  const double w4 = simulate(cfg, o).L_b.half_width;
  o.replications = 16;
  const double w16 = simulate(cfg, o).L_b.half_width;
  // Expected ratio about 0.5 times the quantile ratio; allow sampling noise.
  CHECK(w16 < w4);
  CHECK(w16 > 0.1 * w4);
}

TEST_CASE("same seed reproduces the run exactly") {
  const SystemConfig cfg = fixtures::scalar(3, 2, 0.6, 0.4, 1.5, 1.0);
  SimOptions o;
  o.horizon = 1e4;
  o.replications = 2;
  o.seed = 77;
  const SimEstimate a = simulate(cfg, o), b = simulate(cfg, o);
  CHECK(a.L_orb.mean == b.L_orb.mean);
  CHECK(a.runs[1].events == b.runs[1].events);
  o.seed = 78;
  CHECK(simulate(cfg, o).runs[0].events != a.runs[0].events);
}

TEST_CASE("unstable instance drifts") {
  SimOptions o;
  o.horizon = 2e4;
  o.replications = 4;
  const SimEstimate est = simulate(fixtures::scalar(3, 1, 3.0, 0.5, 1.0, 1.0), o);
  CHECK(est.drift);
  SimOptions s = o;
  const SimEstimate ok = simulate(fixtures::scalar(3, 2, 0.6, 0.4, 1.5, 1.0), s);
  CHECK_FALSE(ok.drift);
}

TEST_CASE("bad simulation options are rejected") {
  const SystemConfig cfg = fixtures::scalar(3, 2, 0.6, 0.4, 1.5, 1.0);
  SimOptions o;
  o.horizon = -1;
  CHECK_THROWS_AS(simulate(cfg, o), Error);
  o = SimOptions{};
  o.replications = 0;
  CHECK_THROWS_AS(simulate(cfg, o), Error);
}
