// Command-line front end. Talks to the solver only through the C interface.

#include "retrialq/retrialq.h"

#include "CLI11.hpp"

#include <cerrno>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

// Carries a library status up to main, which maps it to the exit code.
struct Failure {
  rq_status status;
  std::string message;
};

void check(rq_status st, const std::string& context) {
  if (st != RQ_OK) throw Failure{st, context + ": " + rq_last_error()};
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// RFC-4180 field: quoted only when it contains a delimiter, quote or line break.
std::string field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

using ConfigPtr = std::unique_ptr<rq_config, decltype(&rq_config_free)>;

struct Run {
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;  // name=value, applied in order
  std::string out_dir = ".";
  long long seed = -1;                 // -1: take the config value
  std::map<std::string, std::string> extra;  // command-specific arguments, recorded in the manifest
};

ConfigPtr load(const Run& run) {
  rq_config* raw = nullptr;
  check(rq_config_load(run.config_path.c_str(), &raw), "loading " + run.config_path);
  ConfigPtr cfg(raw, rq_config_free);
  for (const std::string& ov : run.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw Failure{RQ_ARGUMENT, "override '" + ov + "' is not name=value"};
    double value = 0;
    try {
      value = std::stod(ov.substr(eq + 1));
    } catch (const std::exception&) {
      throw Failure{RQ_ARGUMENT, "override '" + ov + "' has a non-numeric value"};
    }
    check(rq_config_set(cfg.get(), ov.substr(0, eq).c_str(), value), "override " + ov);
  }
  return cfg;
}

std::string config_json(const rq_config* cfg) {
  size_t needed = 0;
  check(rq_config_to_json(cfg, nullptr, 0, &needed), "serializing config");
  std::string s(needed, '\0');
  check(rq_config_to_json(cfg, s.data(), s.size(), &needed), "serializing config");
  s.resize(needed - 1);
  return s;
}

// Manifest text is canonical: fixed key order, no timestamps.
std::string manifest_text(const Run& run, const rq_config* cfg) {
  std::ostringstream os;
  os << "command=" << run.command << '\n' << "config_path=" << run.config_path << '\n';
  for (const auto& ov : run.overrides) os << "override=" << ov << '\n';
  os << "out_dir=" << run.out_dir << '\n' << "seed=" << run.seed << '\n';
  for (const auto& [k, v] : run.extra) os << k << '=' << v << '\n';
  os << "config=" << config_json(cfg) << '\n';
  return os.str();
}

struct Header {
  double captured_mass = 1.0;
  bool has_mass = false;
};

std::ofstream open_output(const Run& run, const rq_config* cfg, const std::string& name, const Header& h) {
  std::error_code ec;
  fs::create_directories(run.out_dir, ec);
  if (ec) throw Failure{RQ_IO, "cannot create output directory " + run.out_dir + ": " + ec.message()};
  const fs::path path = fs::path(run.out_dir) / name;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Failure{RQ_IO, "cannot write " + path.string()};

  const std::string manifest = manifest_text(run, cfg);
  char hash[65];
  check(rq_sha256_hex(manifest.data(), manifest.size(), hash), "hashing manifest");
  double eps = 0, eps0 = 0, nmax = 0;
  check(rq_config_get(cfg, "epsilon", &eps), "reading tolerances");
  check(rq_config_get(cfg, "epsilon0", &eps0), "reading tolerances");
  check(rq_config_get(cfg, "N_max", &nmax), "reading tolerances");
  os << "# retrialq " << rq_version() << '\n'
     << "# manifest_sha256 " << hash << '\n'
     << "# command " << run.command << '\n'
     << "# config " << run.config_path << '\n';
  for (const auto& ov : run.overrides) os << "# override " << ov << '\n';
  if (run.seed >= 0) os << "# seed " << run.seed << '\n';
  for (const auto& [k, v] : run.extra) os << "# " << k << ' ' << v << '\n';
  os << "# captured_mass " << (h.has_mass ? num(h.captured_mass) : std::string("n/a")) << '\n'
     << "# tolerances epsilon=" << num(eps) << " epsilon0=" << num(eps0) << " N_max=" << num(nmax) << '\n';
  return os;
}

void print_kv(const std::string& k, double v) { std::cout << k << " = " << num(v) << '\n'; }

int cmd_validate(const Run& run) {
  const ConfigPtr cfg = load(run);
  char buf[8192];
  size_t count = 0;
  const rq_status st = rq_config_validate(cfg.get(), buf, sizeof buf, &count);
  if (st == RQ_OK) {
    std::cout << "valid\n";
    return 0;
  }
  if (st != RQ_INVALID_CONFIG) check(st, "validating");
  std::cout << buf;
  throw Failure{RQ_INVALID_CONFIG, std::to_string(count) + " violation(s)"};
}

int cmd_rates(const Run& run) {
  const ConfigPtr cfg = load(run);
  rq_rates r{};
  check(rq_rates_compute(cfg.get(), &r), "computing rates");
  print_kv("lambda1", r.lambda1);
  print_kv("lambda2", r.lambda2);
  print_kv("lambda_b1", r.lambda_b1);
  print_kv("lambda_b2", r.lambda_b2);
  print_kv("sigma", r.sigma);
  print_kv("mu", r.mu);
  std::ofstream os = open_output(run, cfg.get(), "rates.csv", {});
  os << "name,value\n"
     << "lambda1," << num(r.lambda1) << '\n'
     << "lambda2," << num(r.lambda2) << '\n'
     << "lambda_b1," << num(r.lambda_b1) << '\n'
     << "lambda_b2," << num(r.lambda_b2) << '\n'
     << "sigma," << num(r.sigma) << '\n'
     << "mu," << num(r.mu) << '\n';
  return 0;
}

int cmd_stability(const Run& run, bool with_det) {
  const ConfigPtr cfg = load(run);
  rq_stability s{};
  check(rq_stability_check(cfg.get(), with_det ? 1 : 0, &s), "stability check");
  print_kv("rho", s.rho);
  print_kv("mu_bar_1", s.mu_bar_1);
  print_kv("mu_bar_2", s.mu_bar_2);
  std::cout << "stable = " << (s.stable ? "true" : "false") << '\n'
            << "near_critical = " << (s.near_critical ? "true" : "false") << '\n';
  if (s.has_det_derivative)
    std::cout << "det_derivative_sign = " << s.det_sign << '\n' << "det_derivative_log_abs = " << num(s.det_log_abs) << '\n';
  if (!s.stable) throw Failure{RQ_UNSTABLE, "load rho=" + num(s.rho) + " is not below 1"};
  return 0;
}

using SolutionPtr = std::unique_ptr<rq_solution, decltype(&rq_solution_free)>;

SolutionPtr solve(const rq_config* cfg) {
  rq_solution* raw = nullptr;
  check(rq_solve(cfg, &raw), "solving");
  return SolutionPtr(raw, rq_solution_free);
}

int cmd_solve(const Run& run) {
  const ConfigPtr cfg = load(run);
  const SolutionPtr sol = solve(cfg.get());
  rq_solution_info info{};
  check(rq_solution_info_get(sol.get(), &info), "reading solution");
  Header h{info.captured_mass, true};
  std::ofstream os = open_output(run, cfg.get(), "distribution.csv", h);
  os << "level,busy,probability\n";
  for (int i = 0; i <= info.N; ++i)
    for (int b = 0; b <= info.c; ++b) {
      double p = 0;
      check(rq_solution_joint(sol.get(), i, b, &p), "reading joint pmf");
      os << i << ',' << b << ',' << num(p) << '\n';
    }
  std::cout << "levels = " << info.N + 1 << '\n' << "k0 = " << info.k0 << '\n';
  print_kv("captured_mass", info.captured_mass);
  print_kv("tail_estimate", info.tail_estimate);
  std::cout << "wrote " << (fs::path(run.out_dir) / "distribution.csv").string() << '\n';
  return 0;
}

int cmd_measures(const Run& run) {
  const ConfigPtr cfg = load(run);
  const SolutionPtr sol = solve(cfg.get());
  rq_measures m{};
  check(rq_measures_compute(sol.get(), cfg.get(), &m), "computing measures");
  const std::vector<std::pair<const char*, double>> rows = {
      {"L_b", m.L_b},       {"L_orb", m.L_orb},   {"L_orb_tail_bound", m.L_orb_tail_bound},
      {"L_s", m.L_s},       {"P_b1", m.P_b1},     {"P_b1_min_form", m.P_b1_min_form},
      {"P_bb1", m.P_bb1},   {"P_b2", m.P_b2},     {"P_b2_min_form", m.P_b2_min_form},
      {"P_bb2", m.P_bb2},   {"E_B", m.E_B},       {"P00", m.P00}};
  Header h{m.captured_mass, true};
  std::ofstream os = open_output(run, cfg.get(), "measures.csv", h);
  os << "name,value\n";
  for (const auto& [k, v] : rows) {
    os << k << ',' << num(v) << '\n';
    print_kv(k, v);
  }
  return 0;
}

int cmd_simulate(const Run& run, double horizon, int replications, int grid, int threads) {
  const ConfigPtr cfg = load(run);
  rq_sim_defaults d{};
  check(rq_config_simulation(cfg.get(), &d), "reading simulation block");
  rq_sim_options o = rq_sim_options_default();
  o.horizon = horizon > 0 ? horizon : d.horizon;
  o.replications = replications > 0 ? replications : d.replications;
  o.seed = run.seed >= 0 ? static_cast<uint64_t>(run.seed) : d.seed;
  o.grid_levels = grid >= 0 ? grid : d.grid_levels;
  o.threads = threads;
  rq_simulation* raw = nullptr;
  check(rq_simulate(cfg.get(), &o, &raw), "simulating");
  std::unique_ptr<rq_simulation, decltype(&rq_simulation_free)> sim(raw, rq_simulation_free);
  rq_sim_summary s{};
  check(rq_simulation_summary(sim.get(), &s), "reading simulation");
  Run recorded = run;
  recorded.seed = static_cast<long long>(o.seed);
  recorded.extra["horizon"] = num(o.horizon);
  recorded.extra["replications"] = std::to_string(o.replications);
  std::ofstream os = open_output(recorded, cfg.get(), "simulation.csv", {});
  os << "quantity,level,busy,mean,half_width_99\n";
  const std::vector<std::pair<const char*, rq_interval>> rows = {
      {"L_b", s.L_b}, {"L_orb", s.L_orb}, {"P_b1", s.P_b1}, {"P_b2", s.P_b2}, {"P_bb1", s.P_bb1}, {"P_bb2", s.P_bb2}};
  for (const auto& [k, v] : rows) {
    os << k << ",,," << num(v.mean) << ',' << num(v.half_width) << '\n';
    std::cout << k << " = " << num(v.mean) << " +- " << num(v.half_width) << '\n';
  }
  for (int i = 0; i <= s.grid_levels; ++i)
    for (int b = 0; b <= s.c; ++b) {
      rq_interval iv{};
      check(rq_simulation_joint(sim.get(), i, b, &iv), "reading simulation");
      os << "P," << i << ',' << b << ',' << num(iv.mean) << ',' << num(iv.half_width) << '\n';
    }
  std::cout << "drift = " << (s.drift ? "true" : "false") << '\n';
  return 0;
}

int write_optimum(const Run& run, const rq_config* cfg, rq_optimum* raw, const std::string& name) {
  std::unique_ptr<rq_optimum, decltype(&rq_optimum_free)> opt(raw, rq_optimum_free);
  rq_outcome outcome{};
  int c_star = -1, g_star = -1;
  check(rq_optimum_result(opt.get(), &outcome, &c_star, &g_star), "reading optimum");
  const char* label = outcome == RQ_OPTIMAL ? "optimal" : outcome == RQ_INFEASIBLE ? "infeasible" : "budget-exhausted";
  Run recorded = run;
  recorded.extra["outcome"] = label;
  recorded.extra["c_star"] = std::to_string(c_star);
  recorded.extra["g_star"] = std::to_string(g_star);
  std::ofstream os = open_output(recorded, cfg, name, {});
  os << "c,g,solved,status,P_b1,P_b2\n";
  for (size_t k = 0; k < rq_optimum_count(opt.get()); ++k) {
    rq_evaluation e{};
    check(rq_optimum_evaluation(opt.get(), k, &e), "reading evaluations");
    os << e.c << ',' << e.g << ',' << e.solved << ',' << field(rq_status_name(static_cast<rq_status>(e.status)))
       << ',' << num(e.P_b1) << ',' << num(e.P_b2) << '\n';
  }
  std::cout << "outcome = " << label << '\n' << "c_star = " << c_star << '\n' << "g_star = " << g_star << '\n';
  if (outcome == RQ_BUDGET_EXHAUSTED) throw Failure{RQ_BUDGET, "no feasible c within the budget"};
  return 0;
}

int cmd_optimize_g(const Run& run, int c, double p0, int threads) {
  const ConfigPtr cfg = load(run);
  double cv = 0;
  check(rq_config_get(cfg.get(), "c", &cv), "reading c");
  const int cc = c > 0 ? c : static_cast<int>(cv);
  rq_optimum* raw = nullptr;
  check(rq_optimize_g(cfg.get(), cc, p0, threads, &raw), "optimizing g");
  return write_optimum(run, cfg.get(), raw, "optimize_g.csv");
}

int cmd_optimize_c(const Run& run, double p1, double p2, int c_max, int threads) {
  const ConfigPtr cfg = load(run);
  rq_optimum* raw = nullptr;
  check(rq_optimize_c(cfg.get(), p1, p2, c_max, threads, &raw), "optimizing c");
  return write_optimum(run, cfg.get(), raw, "optimize_c.csv");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const double a = std::stod(text.substr(0, dots));
      std::string rest = text.substr(dots + 2);
      double step = 1.0;
      const auto colon = rest.find(':');
      if (colon != std::string::npos) {
        step = std::stod(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
      }
      const double b = std::stod(rest);
      if (!(step > 0) || b < a) throw Failure{RQ_ARGUMENT, "grid '" + text + "' needs from <= to and step > 0"};
      for (double x = a; x <= b + 1e-9 * step; x += step) out.push_back(x);
    } else {
      std::stringstream ss(text);
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    }
  } catch (const std::invalid_argument&) {
    throw Failure{RQ_ARGUMENT, "cannot parse grid '" + text + "'"};
  }
  return out;
}

int cmd_sweep(const Run& run, const std::string& param_arg, const std::string& grid_arg, int threads) {
  const ConfigPtr cfg = load(run);
  std::string param = param_arg;
  std::vector<double> values;
  if (!grid_arg.empty()) {
    values = parse_grid(grid_arg);
  } else {
    size_t count = 0;
    char name[64];
    check(rq_config_sweep(cfg.get(), name, sizeof name, nullptr, 0, &count), "reading sweep block");
    if (count == 0) throw Failure{RQ_ARGUMENT, "no --values given and the config has no sweep block"};
    values.resize(count);
    check(rq_config_sweep(cfg.get(), name, sizeof name, values.data(), values.size(), &count), "reading sweep block");
    if (param.empty()) param = name;
  }
  if (param.empty()) throw Failure{RQ_ARGUMENT, "sweep parameter not given"};
  std::vector<rq_sweep_row> rows(values.size());
  check(rq_sweep(cfg.get(), param.c_str(), values.data(), values.size(), threads, rows.data()), "sweeping");
  Run recorded = run;
  recorded.extra["param"] = param;
  std::string grid;
  for (double v : values) grid += (grid.empty() ? "" : ";") + num(v);
  recorded.extra["grid"] = grid;
  double min_mass = 1.0;
  for (const auto& r : rows)
    if (r.status == 0) min_mass = std::min(min_mass, r.captured_mass);
  std::ofstream os = open_output(recorded, cfg.get(), "sweep.csv", {min_mass, true});
  os << field(param) << ",L_orb,P_b1,P_b2,L_b,rho,status\n";
  for (const auto& r : rows) {
    os << num(r.param) << ',' << num(r.L_orb) << ',' << num(r.P_b1) << ',' << num(r.P_b2) << ',' << num(r.L_b)
       << ',' << num(r.rho) << ',' << rq_status_name(static_cast<rq_status>(r.status)) << '\n';
    std::cout << param << '=' << num(r.param) << " L_orb=" << num(r.L_orb) << " P_b1=" << num(r.P_b1)
              << " P_b2=" << num(r.P_b2) << " status=" << rq_status_name(static_cast<rq_status>(r.status)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-server retrial queue with guard servers: solver, measures, simulation, optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rq_version()));

  Run run;
  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", run.config_path, "Configuration file (JSON)")->required();
    sub->add_option("-o,--out", run.out_dir, "Output directory");
    sub->add_option("-s,--set", run.overrides, "Parameter override name=value (repeatable)");
  };

  auto* v = app.add_subcommand("validate", "Check the configuration against the model invariants");
  auto* r = app.add_subcommand("rates", "Arrival, retrial and service rates");
  auto* st = app.add_subcommand("stability", "Ergodicity condition");
  bool with_det = false;
  st->add_flag("--det", with_det, "Also evaluate the determinant-derivative sign");
  auto* so = app.add_subcommand("solve", "Stationary distribution, written as CSV");
  auto* me = app.add_subcommand("measures", "Performance measures, written as CSV");
  auto* si = app.add_subcommand("simulate", "Discrete-event simulation with 99% confidence intervals");
  double horizon = 0;
  int reps = 0, grid = -1, threads = 0;
  si->add_option("--horizon", horizon, "Simulated time per replication");
  si->add_option("--replications", reps, "Number of independent replications");
  si->add_option("--seed", run.seed, "Base seed");
  si->add_option("--grid-levels", grid, "Orbit levels reported individually");
  auto* og = app.add_subcommand("optimize-g", "Largest guard threshold meeting the priority blocking target");
  int c_opt = 0;
  double p0 = 0;
  og->add_option("--servers", c_opt, "Number of servers (defaults to the config)");
  og->add_option("--p0", p0, "Upper bound on priority blocking")->required();
  auto* oc = app.add_subcommand("optimize-c", "Smallest server count with a feasible threshold");
  double p1 = 0, p2 = 0;
  int c_max = 10;
  oc->add_option("--p1", p1, "Upper bound on primary blocking")->required();
  oc->add_option("--p2", p2, "Upper bound on priority blocking")->required();
  oc->add_option("--c-max", c_max, "Largest server count to try");
  auto* sw = app.add_subcommand("sweep", "Vary one parameter over a grid");
  std::string param, values;
  sw->add_option("--param", param, "Parameter name (defaults to the config sweep block)");
  sw->add_option("--values", values, "Grid: a,b,c or from..to[:step]");
  for (CLI::App* sub : {v, r, st, so, me, si, og, oc, sw}) common(sub);
  for (CLI::App* sub : {si, og, oc, sw}) sub->add_option("--threads", threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(RQ_ARGUMENT);
  }

  try {
    run.command = app.get_subcommands().front()->get_name();
    if (run.command == "optimize-g") {
      run.extra["p0"] = num(p0);
      if (c_opt > 0) run.extra["servers"] = std::to_string(c_opt);
    } else if (run.command == "optimize-c") {
      run.extra["p1"] = num(p1);
      run.extra["p2"] = num(p2);
      run.extra["c_max"] = std::to_string(c_max);
    }
    if (*v) return cmd_validate(run);
    if (*r) return cmd_rates(run);
    if (*st) return cmd_stability(run, with_det);
    if (*so) return cmd_solve(run);
    if (*me) return cmd_measures(run);
    if (*si) return cmd_simulate(run, horizon, reps, grid, threads);
    if (*og) return cmd_optimize_g(run, c_opt, p0, threads);
    if (*oc) return cmd_optimize_c(run, p1, p2, c_max, threads);
    if (*sw) return cmd_sweep(run, param, values, threads);
  } catch (const Failure& f) {
    std::cerr << "error (" << rq_status_name(f.status) << "): " << f.message << '\n';
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(RQ_INTERNAL);
  }
  return static_cast<int>(RQ_INTERNAL);
}
