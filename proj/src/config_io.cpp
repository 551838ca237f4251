#include "config_io.hpp"

#include "ergodicity.hpp"
#include "error.hpp"
#include "performance.hpp"
#include "solver.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace retrialq {

namespace {

using nlohmann::json;

Mat matrix_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(Status::invalid_config, what + ": expected a nonempty array of rows");
  const size_t rows = j.size();
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw Error(Status::invalid_config, what + ": rows must be nonempty arrays");
  Mat m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw Error(Status::invalid_config, what + ": ragged rows");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw Error(Status::invalid_config, what + ": entries must be numbers");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

Vec vector_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(Status::invalid_config, what + ": expected a nonempty array");
  Vec v(j.size());
  for (size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw Error(Status::invalid_config, what + ": entries must be numbers");
    v(k) = j[k].get<double>();
  }
  return v;
}

json matrix_to(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json vector_to(const Eigen::Ref<const Vec>& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

BmapSpec bmap_from(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("matrices"))
    throw Error(Status::invalid_config, what + ": missing 'matrices'");
  const json& ms = j.at("matrices");
  if (!ms.is_array() || ms.size() < 2)
    throw Error(Status::invalid_config, what + ".matrices: need D_0 and at least D_1");
  BmapSpec b;
  for (size_t k = 0; k < ms.size(); ++k) b.D.push_back(matrix_from(ms[k], what + ".matrices[" + std::to_string(k) + "]"));
  return b;
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(Status::invalid_config, where + ": missing '" + key + "'");
  return j.at(key);
}

int as_int(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(Status::invalid_config, what + ": expected a number");
  const double v = j.get<double>();
  if (v != std::floor(v)) throw Error(Status::invalid_config, what + ": expected an integer");
  return static_cast<int>(v);
}

double as_double(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(Status::invalid_config, what + ": expected a number");
  return j.get<double>();
}

std::vector<double> sweep_values(const json& s) {
  if (s.contains("values")) {
    const Vec v = vector_from(s.at("values"), "sweep.values");
    return {v.data(), v.data() + v.size()};
  }
  const double from = as_double(require(s, "from", "sweep"), "sweep.from");
  const double to = as_double(require(s, "to", "sweep"), "sweep.to");
  const double step = s.contains("step") ? as_double(s.at("step"), "sweep.step") : 1.0;
  if (!(step > 0) || to < from) throw Error(Status::invalid_config, "sweep: need from <= to and step > 0");
  std::vector<double> out;
  const long n = std::lround(std::floor((to - from) / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(from + static_cast<double>(k) * step);
  return out;
}

}  // namespace

SystemConfig ConfigFile::materialize() const {
  SystemConfig cfg = base;
  cfg.bmap1 = base.bmap1.scaled(scales.lambda_o);
  cfg.bmap2 = base.bmap2.scaled(scales.lambda_h);
  cfg.mmpp = base.mmpp.scaled(scales.lambda_r);
  return cfg;
}

ConfigFile parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Status::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Status::invalid_config, "config must be a JSON object");
  ConfigFile out;
  SystemConfig& cfg = out.base;
  cfg.bmap1 = bmap_from(require(j, "bmap1", "config"), "bmap1");
  cfg.bmap2 = bmap_from(require(j, "bmap2", "config"), "bmap2");
  const json& mm = require(j, "mmpp", "config");
  cfg.mmpp.T0 = matrix_from(require(mm, "T0", "mmpp"), "mmpp.T0");
  cfg.mmpp.sigma = vector_from(require(mm, "T1", "mmpp"), "mmpp.T1");
  const json& ph = require(j, "ph", "config");
  cfg.service.alpha = vector_from(require(ph, "alpha", "ph"), "ph.alpha").transpose();
  cfg.service.S = matrix_from(require(ph, "S", "ph"), "ph.S");
  const json& sv = require(j, "servers", "config");
  cfg.c = as_int(require(sv, "c", "servers"), "servers.c");
  cfg.g = as_int(require(sv, "g", "servers"), "servers.g");
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (s.contains("epsilon")) cfg.tol.epsilon = as_double(s.at("epsilon"), "solver.epsilon");
    if (s.contains("epsilon0")) cfg.tol.epsilon0 = as_double(s.at("epsilon0"), "solver.epsilon0");
    if (s.contains("N_max")) cfg.tol.N_max = as_int(s.at("N_max"), "solver.N_max");
    if (s.contains("max_iter")) cfg.tol.max_iter = as_int(s.at("max_iter"), "solver.max_iter");
  }
  if (j.contains("scale")) {
    const json& s = j.at("scale");
    if (s.contains("lambda_o")) out.scales.lambda_o = as_double(s.at("lambda_o"), "scale.lambda_o");
    if (s.contains("lambda_h")) out.scales.lambda_h = as_double(s.at("lambda_h"), "scale.lambda_h");
    if (s.contains("lambda_r")) out.scales.lambda_r = as_double(s.at("lambda_r"), "scale.lambda_r");
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    SweepSpec sw;
    sw.param = require(s, "param", "sweep").get<std::string>();
    if (std::find(param_names().begin(), param_names().end(), sw.param) == param_names().end())
      throw Error(Status::invalid_config, "sweep.param: unknown parameter '" + sw.param + "'");
    sw.values = sweep_values(s);
    if (sw.values.empty()) throw Error(Status::invalid_config, "sweep: empty grid");
    out.sweep = sw;
  }
  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    if (s.contains("horizon")) out.sim.horizon = as_double(s.at("horizon"), "simulation.horizon");
    if (s.contains("replications")) out.sim.replications = as_int(s.at("replications"), "simulation.replications");
    if (s.contains("seed")) out.sim.seed = static_cast<std::uint64_t>(as_int(s.at("seed"), "simulation.seed"));
    if (s.contains("grid_levels")) out.sim.grid_levels = as_int(s.at("grid_levels"), "simulation.grid_levels");
  }
  return out;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Status::io, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  ConfigFile cfg = parse_config(ss.str());
  cfg.source = path;
  return cfg;
}

std::string to_json(const ConfigFile& f) {
  json j;
  auto bmap = [](const BmapSpec& b) {
    json ms = json::array();
    for (const Mat& m : b.D) ms.push_back(matrix_to(m));
    return json{{"matrices", ms}};
  };
  j["bmap1"] = bmap(f.base.bmap1);
  j["bmap2"] = bmap(f.base.bmap2);
  j["mmpp"] = {{"T0", matrix_to(f.base.mmpp.T0)}, {"T1", vector_to(f.base.mmpp.sigma)}};
  j["ph"] = {{"alpha", vector_to(f.base.service.alpha.transpose())}, {"S", matrix_to(f.base.service.S)}};
  j["servers"] = {{"c", f.base.c}, {"g", f.base.g}};
  j["solver"] = {{"epsilon", f.base.tol.epsilon},
                 {"epsilon0", f.base.tol.epsilon0},
                 {"N_max", f.base.tol.N_max},
                 {"max_iter", f.base.tol.max_iter}};
  j["scale"] = {{"lambda_o", f.scales.lambda_o}, {"lambda_h", f.scales.lambda_h}, {"lambda_r", f.scales.lambda_r}};
  if (f.sweep) j["sweep"] = {{"param", f.sweep->param}, {"values", f.sweep->values}};
  j["simulation"] = {{"horizon", f.sim.horizon},
                     {"replications", f.sim.replications},
                     {"seed", f.sim.seed},
                     {"grid_levels", f.sim.grid_levels}};
  return j.dump(2);
}

const std::vector<std::string>& param_names() {
  static const std::vector<std::string> names = {"c",        "g",       "lambda_o", "lambda_h", "lambda_r",
                                                 "epsilon",  "epsilon0", "N_max",    "max_iter"};
  return names;
}

void set_param(ConfigFile& f, const std::string& name, double value) {
  auto integral = [&] {
    if (value != std::floor(value)) throw Error(Status::argument, name + " must be an integer");
    return static_cast<int>(value);
  };
  if (name == "c") f.base.c = integral();
  else if (name == "g") f.base.g = integral();
  else if (name == "lambda_o") f.scales.lambda_o = value;
  else if (name == "lambda_h") f.scales.lambda_h = value;
  else if (name == "lambda_r") f.scales.lambda_r = value;
  else if (name == "epsilon") f.base.tol.epsilon = value;
  else if (name == "epsilon0") f.base.tol.epsilon0 = value;
  else if (name == "N_max") f.base.tol.N_max = integral();
  else if (name == "max_iter") f.base.tol.max_iter = integral();
  else throw Error(Status::argument, "unknown parameter '" + name + "'");
}

double get_param(const ConfigFile& f, const std::string& name) {
  if (name == "c") return f.base.c;
  if (name == "g") return f.base.g;
  if (name == "lambda_o") return f.scales.lambda_o;
  if (name == "lambda_h") return f.scales.lambda_h;
  if (name == "lambda_r") return f.scales.lambda_r;
  if (name == "epsilon") return f.base.tol.epsilon;
  if (name == "epsilon0") return f.base.tol.epsilon0;
  if (name == "N_max") return f.base.tol.N_max;
  if (name == "max_iter") return f.base.tol.max_iter;
  throw Error(Status::argument, "unknown parameter '" + name + "'");
}

std::vector<SweepRow> run_sweep(const ConfigFile& f, const SweepSpec& sweep, int threads) {
  std::vector<SweepRow> rows(sweep.values.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < rows.size(); k = next++) {
      SweepRow& row = rows[k];
      row.param = sweep.values[k];
      try {
        ConfigFile point = f;
        set_param(point, sweep.param, sweep.values[k]);
        const SystemConfig cfg = point.materialize();
        row.rho = stability_check(cfg).rho;
        const StationaryDistribution dist = stationary(cfg);
        const PerformanceReport rep = evaluate(dist, cfg);
        row.L_orb = rep.summary.L_orb;
        row.L_b = rep.summary.L_b;
        row.P_b1 = rep.primary.customer;
        row.P_b2 = rep.priority.customer;
        row.captured_mass = rep.captured_mass;
      } catch (const Error& e) {
        row.status = static_cast<int>(e.status());
      }
    }
  };
  unsigned hw = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
  hw = std::max(1u, std::min<unsigned>(hw, static_cast<unsigned>(rows.size())));
  if (hw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < hw; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace retrialq
