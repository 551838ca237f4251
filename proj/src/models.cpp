#include "models.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace retrialq {

int BmapSpec::max_batch() const {
  int kmax = 0;
  for (int k = 1; k < static_cast<int>(D.size()); ++k)
    if (D[k].size() > 0 && D[k].cwiseAbs().maxCoeff() > 0.0) kmax = k;
  return kmax;
}

Mat BmapSpec::at(int k) const {
  if (k >= 0 && k < static_cast<int>(D.size())) return D[k];
  return Mat::Zero(order(), order());
}

Mat BmapSpec::sum() const {
  Mat s = Mat::Zero(order(), order());
  for (const auto& d : D) s += d;
  return s;
}

Mat BmapSpec::eval(double z) const {
  Mat s = Mat::Zero(order(), order());
  double zk = 1.0;
  for (const auto& d : D) {
    s += zk * d;
    zk *= z;
  }
  return s;
}

BmapSpec BmapSpec::scaled(double s) const {
  BmapSpec out = *this;
  for (auto& d : out.D) d *= s;
  return out;
}

std::string to_string(const Violation& v) {
  std::ostringstream os;
  os << v.item;
  if (v.row >= 0) os << " row " << v.row;
  os << ": " << v.rule;
  return os.str();
}

namespace {

constexpr double kRowSumTol = 1e-10;

bool all_finite(const Mat& a) { return a.allFinite(); }

double diag_scale(const Mat& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) s = std::max(s, std::abs(a(i, i)));
  return std::max(s, 1e-300);
}

// Strong connectivity of the directed graph of positive off-diagonal entries.
bool irreducible(const Mat& a) {
  const Eigen::Index n = a.rows();
  if (n <= 1) return true;
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!stack.empty()) {
      Eigen::Index u = stack.back();
      stack.pop_back();
      for (Eigen::Index v = 0; v < n; ++v) {
        double w = transpose ? a(v, u) : a(u, v);
        if (v != u && w > 0.0 && !seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reach(false) && reach(true);
}

bool nonsingular(const Mat& a) {
  if (a.rows() == 0) return false;
  Eigen::FullPivLU<Mat> lu(a);
  lu.setThreshold(1e-13);
  return lu.isInvertible();
}

class Collector {
 public:
  void add(std::string item, int row, std::string rule) {
    out.push_back({std::move(item), row, std::move(rule)});
  }
  std::vector<Violation> out;
};

void check_square(Collector& c, const std::string& name, const Mat& a, Eigen::Index n) {
  if (a.rows() != n || a.cols() != n) {
    std::ostringstream os;
    os << "must be " << n << "x" << n << ", got " << a.rows() << "x" << a.cols();
    c.add(name, -1, os.str());
  }
}

void check_rate_matrix(Collector& c, const std::string& name, const Mat& a, bool need_negative_diag) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i == j) {
        if (need_negative_diag && !(a(i, j) < 0.0)) c.add(name, static_cast<int>(i), "diagonal must be strictly negative");
      } else if (a(i, j) < 0.0) {
        c.add(name, static_cast<int>(i), "off-diagonal entries must be nonnegative");
        break;
      }
    }
}

// Row sums are judged against the diagonal scale of the defining matrix.
void check_conservative(Collector& c, const std::string& name, const Mat& a, double scale) {
  const double tol = kRowSumTol * scale;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    if (std::abs(a.row(i).sum()) > tol) c.add(name, static_cast<int>(i), "row sums must be zero");
}

void check_bmap(Collector& c, const std::string& name, const BmapSpec& b) {
  if (b.D.size() < 2) {
    c.add(name, -1, "needs D_0 and at least one batch matrix");
    return;
  }
  const Eigen::Index w = b.D[0].rows();
  if (w < 1) {
    c.add(name, -1, "order must be at least 1");
    return;
  }
  bool shapes_ok = true;
  for (size_t k = 0; k < b.D.size(); ++k) {
    const std::string item = name + ".D" + std::to_string(k);
    if (b.D[k].rows() != w || b.D[k].cols() != w) {
      check_square(c, item, b.D[k], w);
      shapes_ok = false;
    } else if (!all_finite(b.D[k])) {
      c.add(item, -1, "entries must be finite");
      shapes_ok = false;
    }
  }
  if (!shapes_ok) return;
  check_rate_matrix(c, name + ".D0", b.D[0], true);
  for (size_t k = 1; k < b.D.size(); ++k)
    if (b.D[k].minCoeff() < 0.0) c.add(name + ".D" + std::to_string(k), -1, "entries must be nonnegative");
  if (b.max_batch() == 0) c.add(name, -1, "at least one batch matrix must be nonzero");
  const Mat s = b.sum();
  check_conservative(c, name + " D(1)", s, diag_scale(b.D[0]));
  if (!irreducible(s)) c.add(name + " D(1)", -1, "must be irreducible");
  if (!nonsingular(b.D[0])) c.add(name + ".D0", -1, "must be nonsingular");
}

}  // namespace

std::vector<Violation> validate(const SystemConfig& cfg) {
  Collector col;
  check_bmap(col, "bmap1", cfg.bmap1);
  check_bmap(col, "bmap2", cfg.bmap2);

  const auto& m = cfg.mmpp;
  const Eigen::Index r = m.T0.rows();
  if (r < 1) {
    col.add("mmpp.T0", -1, "order must be at least 1");
  } else if (m.T0.cols() != r || m.sigma.size() != r) {
    col.add("mmpp", -1, "T0 must be square and T1 must have one entry per T0 row");
  } else if (!all_finite(m.T0) || !m.sigma.allFinite()) {
    col.add("mmpp", -1, "entries must be finite");
  } else {
    check_rate_matrix(col, "mmpp.T0", m.T0, false);
    for (Eigen::Index i = 0; i < r; ++i)
      if (!(m.sigma(i) > 0.0)) col.add("mmpp.T1", static_cast<int>(i), "retrial intensity must be strictly positive");
    const Mat t = m.T();
    check_conservative(col, "mmpp T0+T1", t, diag_scale(m.T0));
    if (!irreducible(t)) col.add("mmpp T0+T1", -1, "must be irreducible");
  }

  const auto& ph = cfg.service;
  const Eigen::Index mm = ph.S.rows();
  if (mm < 1) {
    col.add("ph.S", -1, "order must be at least 1");
  } else if (ph.S.cols() != mm || ph.alpha.size() != mm) {
    col.add("ph", -1, "S must be square and alpha must have one entry per S row");
  } else if (!all_finite(ph.S) || !ph.alpha.allFinite()) {
    col.add("ph", -1, "entries must be finite");
  } else {
    if (ph.alpha.minCoeff() < 0.0) col.add("ph.alpha", -1, "PH initial vector must be nonnegative");
    if (std::abs(ph.alpha.sum() - 1.0) > kRowSumTol) col.add("ph.alpha", -1, "PH initial vector must sum to 1");
    check_rate_matrix(col, "ph.S", ph.S, true);
    const Vec s0 = ph.exit_rates();
    const double tol = kRowSumTol * diag_scale(ph.S);
    for (Eigen::Index i = 0; i < mm; ++i)
      if (s0(i) < -tol) col.add("ph.S", static_cast<int>(i), "row sums must be nonpositive");
    if (!(s0.maxCoeff() > tol)) col.add("ph.S", -1, "exit vector must have a strictly positive entry");
    if (!nonsingular(ph.S)) col.add("ph.S", -1, "must be nonsingular");
  }

  if (cfg.c < 2) col.add("servers.c", -1, "c must be at least 2");
  if (cfg.g < 1 || cfg.g > cfg.c - 1) col.add("servers.g", -1, "g must satisfy 1 <= g <= c-1");

  const auto& t = cfg.tol;
  if (!(t.epsilon > 0.0 && t.epsilon < 1.0)) col.add("solver.epsilon", -1, "must lie in (0,1)");
  if (!(t.epsilon0 > 0.0 && t.epsilon0 < 1.0)) col.add("solver.epsilon0", -1, "must lie in (0,1)");
  if (t.N_max < 1) col.add("solver.N_max", -1, "must be at least 1");
  if (t.max_iter < 1) col.add("solver.max_iter", -1, "must be at least 1");
  return col.out;
}

namespace {

void absorb_residual(Mat& diag_holder, const Mat& full) {
  const double tol = kRowSumTol * diag_scale(diag_holder);
  for (Eigen::Index i = 0; i < full.rows(); ++i) {
    const double res = full.row(i).sum();
    if (res != 0.0 && std::abs(res) <= tol) diag_holder(i, i) -= res;
  }
}

}  // namespace

SystemConfig validated(const SystemConfig& config) {
  SystemConfig cfg = config;
  auto repair_bmap = [](BmapSpec& b) {
    if (b.D.size() >= 2 && b.D[0].rows() >= 1) {
      for (const auto& d : b.D)
        if (d.rows() != b.D[0].rows() || d.cols() != b.D[0].rows() || !d.allFinite()) return;
      absorb_residual(b.D[0], b.sum());
    }
  };
  repair_bmap(cfg.bmap1);
  repair_bmap(cfg.bmap2);
  auto& m = cfg.mmpp;
  if (m.T0.rows() >= 1 && m.T0.cols() == m.T0.rows() && m.sigma.size() == m.T0.rows() && m.T0.allFinite() &&
      m.sigma.allFinite())
    absorb_residual(m.T0, m.T());
  auto& ph = cfg.service;
  if (ph.alpha.size() > 0 && ph.alpha.allFinite()) {
    const double s = ph.alpha.sum();
    if (std::abs(s - 1.0) <= kRowSumTol && s > 0.0) ph.alpha /= s;
  }

  const auto violations = validate(cfg);
  if (!violations.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& v : violations) msg += "\n  " + to_string(v);
    throw Error(Status::invalid_config, msg);
  }
  return cfg;
}

RowVec stationary_vector(const Mat& generator) {
  const Eigen::Index n = generator.rows();
  if (n == 0 || generator.cols() != n) throw Error(Status::invalid_config, "stationary_vector: generator must be square");
  if (!generator.allFinite()) throw Error(Status::invalid_config, "stationary_vector: non-finite entries");
  if (n == 1) return RowVec::Ones(1);
  const double tol = kRowSumTol * diag_scale(generator);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(generator.row(i).sum()) > tol)
      throw Error(Status::invalid_config, "stationary_vector: generator is not conservative");
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && generator(i, j) < 0.0)
        throw Error(Status::invalid_config, "stationary_vector: negative off-diagonal entry");
  }
  const RowVec pi = state_reduction(generator);
  if (pi.minCoeff() <= 0.0) throw Error(Status::invalid_config, "stationary_vector: generator is reducible");
  return pi;
}

RowVec state_reduction(const Mat& generator) {
  const Eigen::Index n = generator.rows();
  if (n == 1) return RowVec::Ones(1);
  // Off-diagonal rates only; negative rounding noise is clamped to zero.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> p = generator.cwiseMax(0.0);
  for (Eigen::Index i = 0; i < n; ++i) p(i, i) = 0.0;
  Vec out_rate(n);
  for (Eigen::Index k = n - 1; k >= 1; --k) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) s += p(k, j);
    if (!(s > 0.0)) throw Error(Status::invalid_config, "stationary_vector: generator is reducible");
    out_rate(k) = s;
    const auto pivot = p.row(k).head(k).eval();
    for (Eigen::Index i = 0; i < k; ++i) {
      const double f = p(i, k);
      if (f == 0.0) continue;
      p.row(i).head(k) += (f / s) * pivot;
    }
  }
  RowVec pi = RowVec::Zero(n);
  pi(0) = 1.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) acc += pi(i) * p(i, k);
    pi(k) = acc / out_rate(k);
  }
  const double total = pi.sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw Error(Status::invalid_config, "stationary_vector: generator is reducible");
  return pi / total;
}

double arrival_rate(const BmapSpec& bmap) {
  const RowVec theta = stationary_vector(bmap.sum());
  Mat d1 = Mat::Zero(bmap.order(), bmap.order());
  for (size_t k = 1; k < bmap.D.size(); ++k) d1 += static_cast<double>(k) * bmap.D[k];
  return (theta * d1).sum();
}

double batch_arrival_rate(const BmapSpec& bmap) {
  const RowVec theta = stationary_vector(bmap.sum());
  return -(theta * bmap.D.at(0)).sum();
}

double retrial_rate(const MmppSpec& mmpp) {
  const RowVec theta = stationary_vector(mmpp.T());
  return theta.dot(mmpp.sigma.transpose());
}

double service_rate(const PhSpec& ph) {
  if (ph.S.rows() == 0 || ph.S.cols() != ph.S.rows() || ph.alpha.size() != ph.S.rows())
    throw Error(Status::invalid_config, "service_rate: malformed PH");
  const Vec x = ph.S.partialPivLu().solve(Vec::Ones(ph.S.rows()));
  const double mean = -ph.alpha.dot(x.transpose());
  if (!(mean > 0.0) || !std::isfinite(mean)) throw Error(Status::invalid_config, "service_rate: nonpositive mean");
  return 1.0 / mean;
}

Rates rates(const SystemConfig& cfg) {
  Rates r;
  r.lambda1 = arrival_rate(cfg.bmap1);
  r.lambda2 = arrival_rate(cfg.bmap2);
  r.lambda_b1 = batch_arrival_rate(cfg.bmap1);
  r.lambda_b2 = batch_arrival_rate(cfg.bmap2);
  r.sigma = retrial_rate(cfg.mmpp);
  r.mu = service_rate(cfg.service);
  return r;
}

}  // namespace retrialq
