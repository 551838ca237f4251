#pragma once

#include "generator.hpp"
#include "models.hpp"

#include <optional>
#include <string>

namespace retrialq {

struct StabilityReport {
  RowVec X1, X2;
  double mu_bar_1 = 0, mu_bar_2 = 0;
  double lambda1 = 0, lambda2 = 0;
  double rho = 0;
  bool stable = false;
  bool near_critical = false;  // rho in [0.95, 1)
  std::optional<double> det_derivative;
};

// Stationary phase vector of g busy servers that are refilled on every
// completion, and the resulting completion rate X·S0^{⊕g}·e.
struct PhaseLoad {
  RowVec X;
  double rate = 0;
};
PhaseLoad saturated_phase_load(const PhSpec& ph, int servers);

StabilityReport stability_check(const SystemConfig& config);

struct DetDerivative {
  double value = 0;    // may overflow to ±inf; sign and log_abs stay exact
  int sign = 0;
  double log_abs = 0;
};

// Central difference (step 1e-5) of det(zI - Y22(z)) at z = 1.
DetDerivative det_derivative_check(const GeneratorView& gen, Eigen::Index max_dim = 4000);

std::string describe(const StabilityReport& report);

}  // namespace retrialq
