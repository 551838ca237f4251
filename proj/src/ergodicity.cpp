#include "ergodicity.hpp"

#include "error.hpp"
#include "kron.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace retrialq {

PhaseLoad saturated_phase_load(const PhSpec& ph, int servers) {
  if (servers < 1) throw Error(Status::argument, "saturated_phase_load: need at least one server");
  const Eigen::Index M = ph.order();
  const Mat s0 = Mat(ph.exit_rates());
  const SpMat down = kron_power_sum(sparse(s0), servers);
  Eigen::Index below = 1;
  for (int i = 0; i < servers - 1; ++i) below *= M;
  const SpMat refill = kron(speye(below), sparse(Mat(ph.alpha)));
  const SpMat A = kron_power_sum(sparse(ph.S), servers) + SpMat(down * refill);
  PhaseLoad out;
  out.X = stationary_vector(Mat(A));
  out.rate = (out.X * (down * Vec::Ones(below))).sum();
  return out;
}

StabilityReport stability_check(const SystemConfig& config) {
  const SystemConfig cfg = validated(config);
  StabilityReport rep;
  rep.lambda1 = arrival_rate(cfg.bmap1);
  rep.lambda2 = arrival_rate(cfg.bmap2);
  const PhaseLoad p1 = saturated_phase_load(cfg.service, cfg.g);
  const PhaseLoad p2 = saturated_phase_load(cfg.service, cfg.c);
  rep.X1 = p1.X;
  rep.X2 = p2.X;
  rep.mu_bar_1 = p1.rate;
  rep.mu_bar_2 = p2.rate;
  if (!(rep.mu_bar_1 > 0.0) || !(rep.mu_bar_2 > 0.0)) throw Error(Status::internal, "stability_check: zero completion rate");
  rep.rho = rep.lambda1 / rep.mu_bar_1 + rep.lambda2 / rep.mu_bar_2;
  rep.stable = rep.rho < 1.0;
  rep.near_critical = rep.stable && rep.rho >= 0.95;
  return rep;
}

namespace {

struct LogDet {
  int sign = 0;
  double log_abs = -std::numeric_limits<double>::infinity();
};

LogDet log_det(const Mat& a) {
  Eigen::PartialPivLU<Mat> lu(a);
  const Mat& m = lu.matrixLU();
  LogDet out;
  out.sign = static_cast<int>(std::lround(lu.permutationP().determinant()));
  out.log_abs = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = m(i, i);
    if (d == 0.0) return {0, -std::numeric_limits<double>::infinity()};
    if (d < 0.0) out.sign = -out.sign;
    out.log_abs += std::log(std::abs(d));
  }
  return out;
}

}  // namespace

DetDerivative det_derivative_check(const GeneratorView& gen, Eigen::Index max_dim) {
  const Eigen::Index start = gen.index.offset(gen.g() - 1);
  const Eigen::Index n = gen.K - start;
  if (n > max_dim) {
    std::ostringstream os;
    os << "det_derivative_check: Y22 has dimension " << n << ", above the dense limit " << max_dim;
    throw Error(Status::budget, os.str());
  }
  const double h = 1e-5;
  auto f = [&](double z) {
    Mat y = eval_Y_unchecked(gen, z).bottomRightCorner(n, n);
    y = -y;
    y.diagonal().array() += z;
    return log_det(y);
  };
  const LogDet hi = f(1.0 + h), lo = f(1.0 - h);
  DetDerivative out;
  if (hi.sign == 0 && lo.sign == 0) return out;
  const double top = std::max(hi.log_abs, lo.log_abs);
  const double diff = hi.sign * std::exp(hi.log_abs - top) - lo.sign * std::exp(lo.log_abs - top);
  if (diff == 0.0) return out;
  out.sign = diff > 0.0 ? 1 : -1;
  out.log_abs = top + std::log(std::abs(diff)) - std::log(2.0 * h);
  out.value = out.sign * std::exp(out.log_abs);
  return out;
}

std::string describe(const StabilityReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << "lambda1=" << r.lambda1 << " lambda2=" << r.lambda2 << " mu_bar_1=" << r.mu_bar_1 << " mu_bar_2=" << r.mu_bar_2
     << " rho=" << r.rho << " stable=" << (r.stable ? "true" : "false");
  if (r.near_critical) os << " (near critical: truncation may need a larger N_max)";
  return os.str();
}

}  // namespace retrialq
