// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include "brute_force.hpp"
#include "config_io.hpp"
#include "ergodicity.hpp"
#include "error.hpp"
#include "fixtures.hpp"
#include "generator.hpp"
#include "optimizer.hpp"
#include "performance.hpp"
#include "simulation.hpp"
#include "solver.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace retrialq;
namespace fs = std::filesystem;

namespace {

const std::string kConfigDir = RETRIALQ_CONFIG_DIR;
const std::string kCli = RETRIALQ_CLI_PATH;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [miss] " << what << ';';
    }
  }
};

bool rel_close(double x, double ref, double tol) { return std::abs(x - ref) <= tol * std::abs(ref); }

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

int failures = 0;
std::vector<int> selected;  // empty runs every criterion

void run(int id, const std::string& title, double budget_seconds, const std::function<void(Verdict&)>& body) {
  if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) return;
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " [error] " << e.what() << ';';
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_seconds > 0) v.expect(secs <= budget_seconds, "runtime " + fmt(secs, 3) + " s over " + fmt(budget_seconds) + " s");
  if (!v.pass) ++failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << fmt(secs, 3) << " s)"
            << v.detail.str() << std::endl;
}

int cli_exit(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

ConfigFile fig_file() { return load_config(kConfigDir + "/fig_sweep_g_m1.json"); }

void criterion_rates(Verdict& v) {
  for (double s : {1.0, 2.0}) {
    const Rates r = rates(fixtures::cellular(8, 6, s, s, s));
    v.expect(rel_close(r.lambda1, 10.6364 * s, 1e-4), "lambda1 " + fmt(r.lambda1, 8));
    v.expect(rel_close(r.lambda2, 1.6667 * s, 1e-4), "lambda2 " + fmt(r.lambda2, 8));
    v.expect(rel_close(r.sigma, 13.2857 * s, 1e-4), "sigma " + fmt(r.sigma, 8));
    v.expect(rel_close(r.mu, 8.1288, 1e-4), "mu " + fmt(r.mu, 8));
  }
  const Rates r = rates(fixtures::cellular(8, 6, 1, 1, 1));
  v.detail << " lambda1=" << fmt(r.lambda1) << " lambda2=" << fmt(r.lambda2) << " sigma=" << fmt(r.sigma)
           << " mu=" << fmt(r.mu);
}

void criterion_dimensions(Verdict& v) {
  const auto k8 = state_space_size(8, 2, 2, 2, 2);
  const auto k10 = state_space_size(10, 2, 2, 2, 2);
  v.expect(k8 == 4088, "K(c=8)=" + std::to_string(k8));
  v.expect(k10 == 16376, "K(c=10)=" + std::to_string(k10));
  const GeneratorView gen = build_generator(fixtures::cellular(8, 6, 2, 2, 2));
  v.expect(gen.K == 4088, "generator level size " + std::to_string(gen.K));
  v.detail << " K8=" << k8 << " K10=" << k10;
}

void criterion_table(Verdict& v) {
  const SystemConfig cfg = fixtures::cellular(8, 6, 2, 2, 2);
  const StationaryDistribution d = stationary(cfg);
  auto P = [&](int i, int b) { return i <= d.N ? d.joint(i, b) : 0.0; };
  auto check = [&](const std::string& name, double got, double want) {
    v.expect(std::abs(got - want) <= 2e-3, name + "=" + fmt(got, 4) + " vs " + fmt(want, 4));
    v.detail << ' ' << name << '=' << fmt(got, 4);
  };
  check("P(0,3)", P(0, 3), 0.2148);
  check("P(0,0)", P(0, 0), 0.0467);
  check("P(1,6)", P(1, 6), 0.0208);
  check("P(2,6)", P(2, 6), 0.0109);
  double row0 = 0, col3 = 0, total = 0;
  for (int b = 0; b <= cfg.c; ++b) row0 += P(0, b);
  for (int i = 0; i <= 10; ++i) {
    col3 += P(i, 3);
    for (int b = 0; b <= cfg.c; ++b) total += P(i, b);
  }
  check("row0", row0, 0.9084);
  check("col3", col3, 0.2206);
  check("total", total, 0.999);
}

void criterion_oracle(Verdict& v) {
  std::mt19937_64 rng(20240601);
  double worst_gap = 0, worst_res = 0;
  for (int t = 0; t < 10; ++t) {
    SystemConfig cfg = fixtures::random_scalar(rng);
    cfg.tol.epsilon0 = 1e-10;
    const StationaryDistribution a = stationary(cfg);
    BruteForceOptions bo;
    bo.orbit_cap = a.N + 30;
    const StationaryDistribution b = brute_force_ctmc(cfg, bo);
    double gap = 0;
    for (int i = 0; i <= a.N; ++i)
      for (int k = 0; k <= cfg.c; ++k) gap = std::max(gap, std::abs(a.joint(i, k) - (i <= b.N ? b.joint(i, k) : 0.0)));
    const double res = balance_residual(build_generator(cfg), a.levels);
    v.expect(gap <= 1e-6, "instance " + std::to_string(t) + " gap " + fmt(gap));
    v.expect(res <= 1e-7, "instance " + std::to_string(t) + " residual " + fmt(res));
    worst_gap = std::max(worst_gap, gap);
    worst_res = std::max(worst_res, res);
  }
  v.detail << " max|dP|=" << fmt(worst_gap, 3) << " max|PQ|=" << fmt(worst_res, 3);
}

void criterion_simulation(Verdict& v) {
  const ConfigFile file = load_config(kConfigDir + "/cellular_table1.json");
  const SystemConfig cfg = file.materialize();
  const PerformanceReport rep = evaluate(stationary(cfg), cfg);
  SimOptions o = file.sim;
  o.horizon = 1e6;
  o.replications = 20;
  const SimEstimate est = simulate(cfg, o);
  auto check = [&](const std::string& name, const Interval& iv, double analytic) {
    v.expect(iv.contains(analytic), name + " CI [" + fmt(iv.mean - iv.half_width) + ", " +
                                        fmt(iv.mean + iv.half_width) + "] misses " + fmt(analytic));
    v.detail << ' ' << name << '=' << fmt(analytic, 5) << "~" << fmt(iv.mean, 5) << "+-" << fmt(iv.half_width, 2);
  };
  check("P(0,3)", est.P(0, 3), rep.P(0, 3));
  check("L_b", est.L_b, rep.summary.L_b);
  check("P_b1", est.P_b1, rep.primary.customer);
  check("P_b2", est.P_b2, rep.priority.customer);
  v.expect(!est.drift, "orbit drift flagged");
}

void criterion_stability(Verdict& v) {
  // rho is affine in lambda_o; locate the critical scale from two evaluations.
  const double r0 = stability_check(fixtures::cellular(4, 3, 1e-9, 1, 1)).rho;
  const double r1 = stability_check(fixtures::cellular(4, 3, 1.0, 1, 1)).rho;
  const double critical = (1.0 - r0) / (r1 - r0);
  const fs::path dir = fs::temp_directory_path() / "retrialq_acceptance";
  fs::create_directories(dir);
  int agree = 0, refused = 0, unstable = 0;
  for (double f : {0.5, 0.7, 0.85, 0.93, 0.97, 1.03, 1.07, 1.15, 1.3, 1.5}) {
    const double lo = f * critical;
    const SystemConfig cfg = fixtures::cellular(4, 3, lo, 1, 1);
    const StabilityReport rep = stability_check(cfg);
    const DetDerivative det = det_derivative_check(build_generator(cfg));
    const bool want_stable = f < 1.0;
    v.expect(rep.stable == want_stable, "rho=" + fmt(rep.rho) + " at lambda_o=" + fmt(lo));
    const bool same = det.sign == (rep.stable ? 1 : -1);
    v.expect(same, "det sign " + std::to_string(det.sign) + " vs rho=" + fmt(rep.rho));
    agree += same;

    ConfigFile file;
    file.base = fixtures::cellular(4, 3, 1, 1, 1);
    file.scales.lambda_o = lo;
    const fs::path path = dir / ("instance_" + fmt(f, 3) + ".json");
    std::ofstream(path) << to_json(file);
    if (!want_stable) {
      ++unstable;
      const int code = cli_exit("solve -c \"" + path.string() + "\" -o \"" + (dir / "out").string() + "\"");
      v.expect(code == 2, "solve exit " + std::to_string(code) + " at lambda_o=" + fmt(lo));
      refused += code == 2;
    } else {
      const int code = cli_exit("stability -c \"" + path.string() + "\"");
      v.expect(code == 0, "stability exit " + std::to_string(code) + " at lambda_o=" + fmt(lo));
    }
  }
  fs::remove_all(dir);
  v.detail << " critical lambda_o=" << fmt(critical) << " agree=" << agree << "/10 refused=" << refused << '/'
           << unstable;
}

void criterion_blocking(Verdict& v) {
  std::vector<SystemConfig> fixtures_list = {
      fixtures::cellular(8, 6, 2, 2, 2), fixtures::cellular(4, 3, 1, 1, 1),
      fixtures::cellular_exponential(6, 3, 1, 2, 2, 8.1288), fixtures::scalar(3, 2, 0.6, 0.4, 1.5, 1.0),
      fig_file().materialize()};
  std::mt19937_64 rng(7);
  for (int t = 0; t < 3; ++t) fixtures_list.push_back(fixtures::random_small(rng, 4, 1 + t, 2, 3));
  for (int t = 0; t < 4; ++t) fixtures_list.push_back(fixtures::random_scalar(rng));
  double worst = 0;
  for (const SystemConfig& cfg : fixtures_list) {
    const StationaryDistribution d = stationary(cfg);
    const Blocking b1 = blocking_primary(d, cfg);
    const Blocking b2 = blocking_priority(d, cfg);
    worst = std::max({worst, std::abs(b1.customer - b1.customer_min), std::abs(b2.customer - b2.customer_min)});
  }
  v.expect(worst <= 1e-12, "max form gap " + fmt(worst));
  v.detail << ' ' << fixtures_list.size() << " fixtures, max gap " << fmt(worst, 3);
}

struct Curve {
  std::vector<int> g;
  std::vector<double> L_orb, P_b1, P_b2;
  std::vector<int> unstable;
};

Curve fig_curve(double lambda_r) {
  ConfigFile file = fig_file();
  file.scales.lambda_r = lambda_r;
  Curve curve;
  for (int g = 1; g <= 9; ++g) {
    SystemConfig cfg = file.materialize();
    cfg.g = g;
    if (!stability_check(cfg).stable) {
      curve.unstable.push_back(g);
      continue;
    }
    const PerformanceReport rep = evaluate(stationary(cfg), cfg);
    curve.g.push_back(g);
    curve.L_orb.push_back(rep.summary.L_orb);
    curve.P_b1.push_back(rep.primary.customer);
    curve.P_b2.push_back(rep.priority.customer);
  }
  return curve;
}

void criterion_figures(Verdict& v) {
  std::map<double, Curve> curves;
  for (double lr : {0.5, 1.0, 2.0}) curves[lr] = fig_curve(lr);
  const double slack = 1e-12;
  for (const auto& [lr, c] : curves) {
    const std::string tag = "lambda_r=" + fmt(lr) + " ";
    // Unstable thresholds have an unbounded orbit; they must form a prefix of g.
    for (size_t k = 0; k < c.unstable.size(); ++k)
      v.expect(c.unstable[k] == static_cast<int>(k) + 1, tag + "unstable g not a prefix");
    v.expect(!c.g.empty(), tag + "no stable g");
    for (size_t k = 1; k < c.g.size(); ++k) {
      v.expect(c.L_orb[k] <= c.L_orb[k - 1] + slack, tag + "L_orb rises at g=" + std::to_string(c.g[k]));
      v.expect(c.P_b1[k] <= c.P_b1[k - 1] + slack, tag + "P_b1 rises at g=" + std::to_string(c.g[k]));
      v.expect(c.P_b2[k] >= c.P_b2[k - 1] - slack, tag + "P_b2 falls at g=" + std::to_string(c.g[k]));
    }
  }
  const Curve& ref = curves[1.0];
  double worst_L = 0, worst_1 = 0, worst_2 = 0;
  for (const auto& [lr, c] : curves) {
    v.expect(c.g == ref.g, "stable ranges differ across lambda_r");
    if (c.g != ref.g) continue;
    for (size_t k = 0; k < c.g.size(); ++k) {
      worst_L = std::max(worst_L, std::abs(c.L_orb[k] - ref.L_orb[k]) / ref.L_orb[k]);
      worst_1 = std::max(worst_1, std::abs(c.P_b1[k] - ref.P_b1[k]) / ref.P_b1[k]);
      worst_2 = std::max(worst_2, std::abs(c.P_b2[k] - ref.P_b2[k]) / ref.P_b2[k]);
    }
  }
  v.expect(worst_L <= 0.05, "L_orb curves differ by " + fmt(100 * worst_L, 3) + "%");
  v.expect(worst_1 <= 0.05, "P_b1 curves differ by " + fmt(100 * worst_1, 3) + "%");
  v.expect(worst_2 <= 0.05, "P_b2 curves differ by " + fmt(100 * worst_2, 3) + "%");
  v.detail << " stable g from " << (ref.g.empty() ? 0 : ref.g.front()) << ", spread L_orb=" << fmt(100 * worst_L, 3)
           << "% P_b1=" << fmt(100 * worst_1, 3) << "% P_b2=" << fmt(100 * worst_2, 3) << '%';
}

// Largest g with a solved P_b2 <= p0, or -1.
int exhaustive_g(const std::vector<Evaluation>& evals, double p0) {
  int best = -1;
  for (const Evaluation& e : evals)
    if (e.solved && e.P_b2 <= p0) best = std::max(best, e.g);
  return best;
}

void criterion_optimizer(Verdict& v) {
  const ConfigFile file = load_config(kConfigDir + "/optimizer_c8_m1.json");
  const SystemConfig base = file.materialize();
  const int c = base.c;
  OptimizerOptions o;
  const std::vector<Evaluation> scan = evaluate_thresholds(base, c, o);

  std::vector<double> levels;
  for (const Evaluation& e : scan)
    if (e.solved) levels.push_back(e.P_b2);
  std::sort(levels.begin(), levels.end());
  v.expect(levels.size() >= 3, "too few solvable thresholds");
  std::vector<double> thresholds = {0.0, 1.0};
  for (size_t k = levels.size() - 1; k > 0 && thresholds.size() < 5; --k)
    thresholds.push_back(std::sqrt(levels[k - 1] * levels[k]));
  for (double p0 : thresholds) {
    const OptimizationResult r = optimize_g(base, c, p0, o);
    const int want = exhaustive_g(scan, p0);
    v.expect(r.g_star == want, "p0=" + fmt(p0) + " g*=" + std::to_string(r.g_star) + " vs " + std::to_string(want));
    v.expect((want < 0) == (r.outcome == Outcome::infeasible), "p0=" + fmt(p0) + " outcome");
  }

  // Exhaustive server-count search.
  const double p1 = 0.1, p2 = 5e-3;
  int want_c = -1, want_g = -1;
  for (int cc = 2; cc <= 8 && want_c < 0; ++cc)
    for (const Evaluation& e : evaluate_thresholds(base, cc, o))
      if (e.solved && e.P_b1 <= p1 && e.P_b2 <= p2) {
        want_c = cc;
        want_g = std::max(want_g, e.g);
      }
  const OptimizationResult rc = optimize_c(base, p1, p2, 8, 2, o);
  v.expect(want_c > 2, "server-count targets do not constrain c");
  v.expect(rc.c_star == want_c && rc.g_star == want_g, "c*=" + std::to_string(rc.c_star) + "/g*=" +
                                                           std::to_string(rc.g_star) + " vs " + std::to_string(want_c) +
                                                           "/" + std::to_string(want_g));

  // Insensitivity of g* to the retrial intensity.
  const double p0 = 1e-3;
  std::vector<int> g_by_lr;
  for (double lr : {1.0, 10.0, 20.0}) {
    ConfigFile f = file;
    f.scales.lambda_r = lr;
    g_by_lr.push_back(optimize_g(f.materialize(), c, p0, o).g_star);
  }
  v.expect(g_by_lr[0] == g_by_lr[1] && g_by_lr[1] == g_by_lr[2],
           "g* across lambda_r: " + std::to_string(g_by_lr[0]) + "," + std::to_string(g_by_lr[1]) + "," +
               std::to_string(g_by_lr[2]));
  v.detail << ' ' << thresholds.size() << " thresholds, c*=" << rc.c_star << " g*=" << rc.g_star
           << ", g* at p0=" << fmt(p0, 3) << " for lambda_r 1/10/20: " << g_by_lr[0] << '/' << g_by_lr[1] << '/'
           << g_by_lr[2];
}

}  // namespace

int main(int argc, char** argv) {
  for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));
  std::cout << "retrialq acceptance" << std::endl;
  run(1, "rate reproduction", 1.0, criterion_rates);
  run(2, "state-space dimensions", 1.0, criterion_dimensions);
  run(3, "cellular stationary table", 600.0, criterion_table);
  run(4, "brute-force oracle equivalence", 60.0, criterion_oracle);
  run(5, "simulation cross-check", 900.0, criterion_simulation);
  run(6, "stability gate", 0.0, criterion_stability);
  run(7, "blocking-form identity", 0.0, criterion_blocking);
  run(8, "threshold curve properties", 0.0, criterion_figures);
  run(9, "optimizer correctness", 0.0, criterion_optimizer);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
