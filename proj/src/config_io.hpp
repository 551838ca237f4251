#pragma once

#include "models.hpp"
#include "simulation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace retrialq {

// Multipliers applied to the stored matrices: D_k by lambda_o, E_k by
// lambda_h, and both T0 and T1 by lambda_r.
struct Scales {
  double lambda_o = 1, lambda_h = 1, lambda_r = 1;
};

struct SweepSpec {
  std::string param;
  std::vector<double> values;
};

struct ConfigFile {
  SystemConfig base;  // unscaled matrices
  Scales scales;
  std::optional<SweepSpec> sweep;
  SimOptions sim;
  std::string source;  // path, or empty for in-memory text

  SystemConfig materialize() const;
};

ConfigFile parse_config(const std::string& json_text);
ConfigFile load_config(const std::string& path);
std::string to_json(const ConfigFile& config);

// Recognized names: c, g, lambda_o, lambda_h, lambda_r, epsilon, epsilon0, N_max, max_iter.
void set_param(ConfigFile& config, const std::string& name, double value);
double get_param(const ConfigFile& config, const std::string& name);
const std::vector<std::string>& param_names();

struct SweepRow {
  double param = 0;
  int status = 0;  // Status code, 0 when solved
  double L_orb = 0, P_b1 = 0, P_b2 = 0, L_b = 0, rho = 0;
  double captured_mass = 0;
};

// Rows are returned in grid order regardless of completion order.
std::vector<SweepRow> run_sweep(const ConfigFile& config, const SweepSpec& sweep, int threads = 0);

}  // namespace retrialq
