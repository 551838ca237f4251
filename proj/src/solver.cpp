#include "solver.hpp"

#include "ergodicity.hpp"
#include "error.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <sstream>

namespace retrialq {

namespace {

double row_norm(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff(); }

// Index bookkeeping shared by the G iteration and the censoring passes.
// Lo: busy < g.  V: busy <= g.  Hp: busy > g.  H: busy >= g.  Land: 1..g.
struct Ranges {
  Eigen::Index K, nLo, nV, nHp, nH, land0, nLand, ng;

  explicit Ranges(const GeneratorView& gen) {
    const auto& idx = gen.index;
    const int g = gen.g();
    K = gen.K;
    nLo = idx.offset(g);
    nV = idx.offset(g + 1);
    nHp = K - nV;
    nH = K - nLo;
    land0 = idx.offset(1);
    nLand = nV - land0;
    ng = nV - nLo;
  }
};

// x with x * A = b, from an LU factorization of A.
RowVec row_solve_lu(const Eigen::PartialPivLU<Mat>& lu, const RowVec& b) {
  Vec x = lu.matrixLU().triangularView<Eigen::Upper>().transpose().solve(b.transpose());
  lu.matrixLU().triangularView<Eigen::UnitLower>().transpose().solveInPlace(x);
  return (lu.permutationP().transpose() * x).transpose();
}

SpMat sub(const SpMat& m, Eigen::Index r, Eigen::Index c, Eigen::Index nr, Eigen::Index nc) {
  SpMat out = m.block(r, c, nr, nc);
  out.makeCompressed();
  return out;
}

}  // namespace

Mat GMatrix::dense() const {
  Mat out = Mat::Zero(K, K);
  out.middleCols(land_begin, land_end - land_begin) = land;
  return out;
}

GMatrix compute_G(const GeneratorView& gen, double epsilon, int max_iter) {
  const Ranges R(gen);
  const int g = gen.g();
  const auto& idx = gen.index;
  const auto Y = limiting_blocks(gen);
  const int kY = static_cast<int>(Y.size()) - 1;

  // Reduced unknown: rows H, columns of busy count g.
  const Eigen::Index gm1 = idx.offset(g - 1);
  const Mat A0 = Mat(sub(Y[1], R.nLo, gm1, R.nH, idx.size(g - 1)) * sub(Y[0], gm1, R.nLo, idx.size(g - 1), R.ng));
  std::vector<SpMat> YHH(kY + 1);
  for (int k = 1; k <= kY; ++k) YHH[k] = sub(Y[k], R.nLo, R.nLo, R.nH, R.nH);

  GMatrix out;
  out.K = R.K;
  out.land_begin = R.land0;
  out.land_end = R.nV;

  Mat X = Mat::Zero(R.nH, R.ng);
  double prev = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    Mat next = A0 + YHH[1] * X;
    if (kY >= 2) {
      const Mat Xg = X.topRows(R.ng);
      Mat power = X;
      for (int k = 2; k <= kY; ++k) {
        power = power * Xg;
        next.noalias() += YHH[k] * power;
      }
    }
    const double inc = row_norm(next - X);
    X.swap(next);
    out.history.push_back(inc);
    out.iterations = it;
    out.residual = inc;
    if (std::isfinite(prev) && prev > 0.0) out.contraction = inc / prev;
    prev = inc;
    if (inc <= epsilon) {
      converged = true;
      break;
    }
  }

  auto assemble = [&](const Mat& Xh) {
    Mat land = Mat::Zero(R.K, R.nLand);
    land.topRows(R.nLo) = Mat(sub(Y[0], 0, R.land0, R.nLo, R.nLand));
    land.block(R.nLo, R.nLo - R.land0, R.nH, R.ng) = Xh;
    return land;
  };
  out.land = assemble(X);

  // Σ_k Y_k G^k on the admissible columns.
  auto full_image = [&](const Mat& land) {
    const Mat inner = land.middleRows(R.land0, R.nLand);
    Mat img = Mat(sub(Y[0], 0, R.land0, R.K, R.nLand));
    Mat power = land;
    for (int k = 1; k <= kY; ++k) {
      if (k > 1) power = power * inner;
      img.noalias() += Y[k] * power;
    }
    return img;
  };
  Mat img = full_image(out.land);
  out.fixed_point_residual = row_norm(img - out.land);
  {
    SpMat y1 = Y[0];
    for (int k = 1; k <= kY; ++k) y1 += Y[k];
    const Mat lo_rows = Mat(sub(y1, 0, 0, R.nLo, R.K));
    Mat g_lo = Mat::Zero(R.nLo, R.K);
    g_lo.middleCols(R.land0, R.nLand) = out.land.topRows(R.nLo);
    out.shift_row_deviation = row_norm(lo_rows - g_lo);
  }

  const double accept = std::max(10.0 * epsilon, 1e-13);
  if (!converged || out.fixed_point_residual > accept || out.shift_row_deviation > accept) {
    // Unreduced iteration from zero on the admissible columns.
    out.used_full_iteration = true;
    Mat land = Mat::Zero(R.K, R.nLand);
    converged = false;
    out.history.clear();
    prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
      Mat next = full_image(land);
      const double inc = row_norm(next - land);
      land.swap(next);
      out.history.push_back(inc);
      out.iterations = it;
      out.residual = inc;
      if (std::isfinite(prev) && prev > 0.0) out.contraction = inc / prev;
      prev = inc;
      if (inc <= epsilon) {
        converged = true;
        break;
      }
    }
    out.land = land;
    out.fixed_point_residual = row_norm(full_image(land) - land);
  }
  const Vec rs = out.land.rowwise().sum();
  out.min_row_sum = rs.minCoeff();
  out.max_row_sum = rs.maxCoeff();
  if (!converged) {
    std::ostringstream os;
    os << "G iteration did not converge in " << max_iter << " iterations (last increment " << out.residual << ")";
    throw Error(Status::convergence, os.str());
  }
  return out;
}

namespace {

// One-step censored matrix at level k + 1 with every higher level using G.
Mat one_step(const GeneratorView& gen, const Mat& G, int k) {
  Mat A = Mat(gen.Q_diag(k + 1));
  Mat power = Mat::Identity(gen.K, gen.K);
  for (int n = 1; n <= gen.kmax; ++n) {
    power = power * G;
    A += gen.Q_up(n) * power;
  }
  const Mat down = Mat(gen.Q_down(k + 1));
  return (-A).partialPivLu().solve(down);
}

}  // namespace

double homogeneity_residual(const GeneratorView& gen, const GMatrix& G, int k) {
  const Mat Gd = G.dense();
  return row_norm(one_step(gen, Gd, k) - Gd);
}

K0Choice choose_k0(const GeneratorView& gen, const GMatrix& G, double epsilon, int N_max) {
  const Mat Gd = G.dense();
  auto res = [&](int k) { return row_norm(one_step(gen, Gd, k) - Gd); };
  K0Choice out;
  int lo = 0, hi = 1;
  double r = res(0);
  if (r <= epsilon) return {0, r, true};
  while (true) {
    r = res(hi);
    if (r <= epsilon) break;
    lo = hi;
    if (hi >= N_max) return {N_max, r, false};
    hi = std::min(2 * hi, N_max);
  }
  double rhi = r;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    const double rm = res(mid);
    if (rm <= epsilon) {
      hi = mid;
      rhi = rm;
    } else {
      lo = mid;
    }
  }
  out.k0 = hi;
  out.residual = rhi;
  out.reached = true;
  return out;
}

double StationaryDistribution::joint(int i, int b) const {
  if (i < 0 || i > N || b < 0 || b > index.c()) throw Error(Status::argument, "joint: index out of range");
  return levels[i].segment(index.offset(b), index.size(b)).sum();
}

namespace {

struct PassResult {
  std::vector<RowVec> levels;
  double total = 0;
  double tail = 0;
  double homogeneity = 0;
};

// Censoring passes for a fixed homogeneity level k0. Every block with busy
// count > g is eliminated once through the constant factor D.
class Censoring {
 public:
  Censoring(const GeneratorView& gen, const GMatrix& G) : gen_(gen), R_(gen), kmax_(gen.kmax) {
    const Ranges& R = R_;
    const Mat D = Mat(sub(gen.Gamma0, R.nV, R.nV, R.nHp, R.nHp));
    if (R.nHp > 0) Dlu_.compute(D);
    const SpMat G0_V_Hp = sub(gen.Gamma0, 0, R.nV, R.nV, R.nHp);
    G0_Hp_V_ = sub(gen.Gamma0, R.nV, 0, R.nHp, R.nV);
    if (R.nHp > 0) {
      Z_ = Mat(R.nV, R.nHp);
      const Mat G0VH = Mat(G0_V_Hp);
      for (Eigen::Index i = 0; i < R.nV; ++i) Z_.row(i) = row_solve_lu(Dlu_, G0VH.row(i));
      Wd_ = Dlu_.solve(Mat(G0_Hp_V_));
    } else {
      Z_ = Mat::Zero(R.nV, 0);
      Wd_ = Mat::Zero(0, R.nV);
    }
    base_ = Mat(sub(gen.Gamma0, 0, 0, R.nV, R.nV));
    if (R.nHp > 0) base_.noalias() -= Z_ * Mat(G0_Hp_V_);
    for (int n = 1; n <= kmax_; ++n) {
      UpV_.push_back(sub(gen.Up[n - 1], 0, R.nLo, R.nV, R.nH));
      UpHp_.push_back(sub(gen.Up[n - 1], R.nV, R.nLo, R.nHp, R.nH));
      Up_.push_back(sub(gen.Up[n - 1], 0, R.nLo, R.K, R.nH));
    }
    QdLo_ = sub(gen.Qd, 0, R.land0, R.nLo, R.nLand);
    retLo_ = gen.ret.head(R.nLo);
    Gland_ = G.land;
    Ginner_ = Gland_.middleRows(R.land0, R.nLand);
    Mat power = Gland_.bottomRows(R.nH);
    for (int n = 1; n <= kmax_; ++n) {
      if (n > 1) power = power * Ginner_;
      PiInf_.push_back(power);
    }
  }

  PassResult run(int k0, const Tolerances& tol, double budget) {
    const Ranges& R = R_;
    const double per_level = 8.0 * (double(R.K) * R.nLo + double(R.nV) * R.nV);
    if (per_level * (k0 + 1) > budget) {
      std::ostringstream os;
      os << "censoring pass with k0=" << k0 << " needs about " << per_level * (k0 + 1) / 1e9
         << " GB, above the memory budget";
      throw Error(Status::budget, os.str());
    }
    k0_ = k0;
    X_.assign(k0, Mat());
    Slu_.assign(k0 + 1, Eigen::PartialPivLU<Mat>());

    // Π_{j,n}[H, Land] for the level currently being censored.
    std::vector<Mat> Pi = PiInf_;
    for (int j = k0; j >= 1; --j) {
      Mat corrHp;
      Mat S = schur(j, Pi, corrHp);
      Slu_[j].compute(S);
      Mat rhs = Mat::Zero(R.nV, R.nLo);
      rhs.topRows(R.nLo).diagonal().setConstant(-1.0);
      const Mat XV = Slu_[j].solve(rhs);
      Mat X(R.K, R.nLo);
      X.topRows(R.nV) = XV;
      if (R.nHp > 0) {
        Mat XH = -Wd_ * XV;
        XH.noalias() -= Dlu_.solve(corrHp * XV.middleRows(R.land0, R.nLand));
        X.bottomRows(R.nHp) = XH;
      }
      X_[j - 1] = std::move(X);
      const Mat GH = G_block(j - 1, R.nLo, R.nH);
      std::vector<Mat> next(kmax_);
      if (kmax_ >= 1) next[0] = GH;
      if (kmax_ >= 2) {
        const Mat Gin = G_block(j - 1, R.land0, R.nLand);
        for (int n = 2; n <= kmax_; ++n) next[n - 1] = Pi[n - 2] * Gin;
      }
      Pi.swap(next);
    }

    PassResult out;
    if (k0 >= 1) out.homogeneity = row_norm(G_block(k0 - 1, 0, R.K) - Gland_);

    // Level 0: censored generator on V, then the eliminated part.
    Mat corrHp;
    const Mat S0 = schur(0, Pi, corrHp);
    const RowVec yV = state_reduction(S0);
    RowVec p0(R.K);
    p0.head(R.nV) = yV;
    if (R.nHp > 0) p0.tail(R.nHp) = -yV * Z_;
    out.levels.push_back(p0);
    double total = p0.sum();

    for (int j = 1; j <= tol.N_max; ++j) {
      RowVec r = RowVec::Zero(R.K);
      for (int k = j; k <= j - 1 + kmax_; ++k) {
        RowVec w = RowVec::Zero(R.nH);
        bool any = false;
        for (int i = std::max(0, k - kmax_); i <= j - 1; ++i) {
          w.noalias() += out.levels[i] * Up_[k - i - 1];
          any = true;
        }
        if (!any) continue;
        RowVec full = RowVec::Zero(R.K);
        full.tail(R.nH) = w;
        for (int m = k - 1; m >= j; --m) full = apply_G(full, m);
        r += full;
      }
      const RowVec y = row_solve(j, r);
      const double mass = y.sum();
      out.levels.push_back(y);
      total += mass;
      if (j > k0 && mass < tol.epsilon0 * total) {
        const double prev = out.levels[j - 1].sum();
        const double ratio = prev > 0.0 ? mass / prev : 1.0;
        const double tail = ratio < 1.0 ? mass * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
        if (tail < tol.epsilon0 * total) {
          out.total = total;
          out.tail = tail;
          return out;
        }
      }
    }
    std::ostringstream os;
    os << "truncation level reached N_max=" << tol.N_max << " with last level mass "
       << out.levels.back().sum() / total << " of the captured total";
    throw Error(Status::budget, os.str());
  }

 private:
  // G_m[rows, Land] as a dense block.
  Mat G_block(int m, Eigen::Index r0, Eigen::Index nr) const {
    if (m >= k0_) return Gland_.middleRows(r0, nr);
    return static_cast<double>(m + 1) * (X_[m].middleRows(r0, nr) * QdLo_);
  }

  // Row vector times G_m, result supported on Land.
  RowVec apply_G(const RowVec& v, int m) const {
    RowVec out = RowVec::Zero(R_.K);
    if (m >= k0_)
      out.segment(R_.land0, R_.nLand) = v * Gland_;
    else
      out.segment(R_.land0, R_.nLand) = static_cast<double>(m + 1) * ((v * X_[m]) * QdLo_);
    return out;
  }

  // Schur complement of -(censored diagonal block at level j) onto V, sign
  // kept as in the generator. corrHp receives the Hp rows of the correction.
  Mat schur(int j, const std::vector<Mat>& Pi, Mat& corrHp) const {
    const Ranges& R = R_;
    Mat S = base_;
    S.diagonal().head(R.nLo) -= static_cast<double>(j) * retLo_;
    corrHp = Mat::Zero(R.nHp, R.nLand);
    Mat corrV = Mat::Zero(R.nV, R.nLand);
    for (int n = 1; n <= kmax_; ++n) {
      corrV.noalias() += UpV_[n - 1] * Pi[n - 1];
      if (R.nHp > 0) corrHp.noalias() += UpHp_[n - 1] * Pi[n - 1];
    }
    if (R.nHp > 0) corrV.noalias() -= Z_ * corrHp;
    S.middleCols(R.land0, R.nLand) += corrV;
    return S;
  }

  // y with y * (-Hbar_jj) = r.
  RowVec row_solve(int j, const RowVec& r) {
    const Ranges& R = R_;
    RowVec u;
    if (R.nHp > 0) u = row_solve_lu(Dlu_, r.tail(R.nHp));
    RowVec t = -r.head(R.nV);
    if (R.nHp > 0) {
      t.noalias() += u * G0_Hp_V_;
      // u times the correction rows: Σ_n (u Up_n[Hp, H]) Π_{j,n}.
      for (int n = 1; n <= kmax_; ++n) {
        RowVec w = RowVec::Zero(R.K);
        w.tail(R.nH) = u * UpHp_[n - 1];
        for (int m = j + n - 1; m >= j; --m) w = apply_G(w, m);
        t += w.head(R.nV);
      }
    }
    RowVec yV;
    if (j < static_cast<int>(Slu_.size()) && j <= k0_ && j >= 1 && Slu_[j].rows() == R.nV) {
      yV = row_solve_lu(Slu_[j], t);
    } else {
      if (j != last_far_) {
        std::vector<Mat> Pi = PiInf_;
        Mat corrHp;
        far_lu_.compute(schur(j, Pi, corrHp));
        last_far_ = j;
      }
      yV = row_solve_lu(far_lu_, t);
    }
    RowVec y(R.K);
    y.head(R.nV) = yV;
    if (R.nHp > 0) y.tail(R.nHp) = -u - yV * Z_;
    return y;
  }

  const GeneratorView& gen_;
  Ranges R_;
  int kmax_;
  int k0_ = 0;
  Eigen::PartialPivLU<Mat> Dlu_;
  Mat Z_, Wd_, base_;
  SpMat G0_Hp_V_, QdLo_;
  std::vector<SpMat> UpV_, UpHp_, Up_;
  Vec retLo_;
  Mat Gland_, Ginner_;
  std::vector<Mat> PiInf_;
  std::vector<Mat> X_;
  std::vector<Eigen::PartialPivLU<Mat>> Slu_;
  Eigen::PartialPivLU<Mat> far_lu_;
  int last_far_ = -1;
};

}  // namespace

StationaryDistribution stationary(const SystemConfig& config, const SolverOptions& options) {
  return stationary(build_generator(config), options);
}

StationaryDistribution stationary(const GeneratorView& gen, const SolverOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const StabilityReport stab = stability_check(gen.cfg);
  if (!stab.stable) {
    std::ostringstream os;
    os << "load rho=" << stab.rho << " is not below 1; the stationary distribution does not exist";
    throw Error(Status::unstable, os.str());
  }
  const Tolerances& tol = gen.cfg.tol;
  const GMatrix G = compute_G(gen, tol.epsilon, tol.max_iter);
  const double c = std::min(G.contraction, 1.0 - 1e-12);
  const double iteration_error = G.residual * c / (1.0 - c);
  const double deficit = 1.0 - G.min_row_sum;
  if (deficit > std::max(1e-6, 10.0 * iteration_error)) {
    std::ostringstream os;
    os << "G is substochastic (row-sum deficit " << deficit << "): the orbit drifts to infinity";
    throw Error(Status::unstable, os.str());
  }

  Censoring cens(gen, G);
  int k0 = std::max(1, options.k0_initial);
  StationaryDistribution out;
  out.passes = 0;
  while (true) {
    if (k0 >= tol.N_max) {
      std::ostringstream os;
      os << "homogeneity level k0=" << k0 << " would reach N_max=" << tol.N_max;
      throw Error(Status::budget, os.str());
    }
    PassResult pass = cens.run(k0, tol, options.memory_budget_bytes);
    ++out.passes;
    const double Ztot = pass.total + pass.tail;
    std::vector<double> mass(pass.levels.size());
    for (size_t j = 0; j < mass.size(); ++j) mass[j] = pass.levels[j].sum() / Ztot;
    double beyond = pass.tail / Ztot;
    for (size_t j = k0; j < mass.size(); ++j) beyond += mass[j];
    if (beyond <= tol.epsilon) {
      out.levels = std::move(pass.levels);
      for (auto& p : out.levels) p /= Ztot;
      out.N = static_cast<int>(out.levels.size()) - 1;
      out.tail_estimate = pass.tail / Ztot;
      out.captured_mass = pass.total / Ztot;
      out.k0 = k0;
      out.tail_beyond_k0 = beyond;
      out.homogeneity_residual = pass.homogeneity;
      break;
    }
    // Smallest level whose estimated upper tail is below epsilon / 4.
    const int N = static_cast<int>(mass.size()) - 1;
    double upper = pass.tail / Ztot;
    int target = N + 1;
    for (int j = N; j >= 0; --j) {
      if (upper + mass[j] > 0.25 * tol.epsilon) break;
      upper += mass[j];
      target = j;
    }
    if (target > N) {
      const double ratio = N >= 1 && mass[N - 1] > 0.0 ? mass[N] / mass[N - 1] : 0.5;
      const double tailN = std::max(pass.tail / Ztot, 1e-300);
      target = ratio < 1.0 && ratio > 0.0
                   ? N + 1 + static_cast<int>(std::ceil(std::log(0.25 * tol.epsilon / tailN) / std::log(ratio)))
                   : 2 * k0;
    }
    k0 = std::max(target, k0 + (k0 + 1) / 2);
  }
  out.g_iterations = G.iterations;
  out.g_residual = G.residual;
  out.g_min_row_sum = G.min_row_sum;
  out.fingerprint = fingerprint(gen.cfg);
  out.tol = tol;
  out.index = gen.index;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace dense {

namespace {

const Mat& pick(const std::vector<Mat>& seq, const Mat& G, int m) {
  return m < static_cast<int>(seq.size()) ? seq[m] : G;
}

// G_{hi-1} ... G_lo
Mat chain(const std::vector<Mat>& seq, const Mat& G, int hi, int lo, Eigen::Index K) {
  Mat out = Mat::Identity(K, K);
  for (int m = hi - 1; m >= lo; --m) out = out * pick(seq, G, m);
  return out;
}

}  // namespace

std::vector<Mat> backward_G_sequence(const GeneratorView& gen, const Mat& G, int k0) {
  std::vector<Mat> seq(std::max(k0, 0));
  const Eigen::Index K = gen.K;
  for (int k = k0 - 1; k >= 0; --k) {
    Mat A = Mat(gen.Q_diag(k + 1));
    for (int j = k + 2; j <= k + 1 + gen.kmax; ++j) A += gen.Q_up(j - k - 1) * chain(seq, G, j, k + 1, K);
    seq[k] = (-A).partialPivLu().solve(Mat(gen.Q_down(k + 1)));
  }
  return seq;
}

Censored censored_blocks(const GeneratorView& gen, const std::vector<Mat>& G_seq, const Mat& G, int N) {
  Censored out;
  out.N = N;
  const Eigen::Index K = gen.K;
  out.Hbar.resize(N + 1);
  for (int i = 0; i <= N; ++i) {
    for (int j = i; j <= N; ++j) {
      Mat h = j == i ? Mat(gen.Q_diag(i)) : (j - i <= gen.kmax ? Mat(gen.Q_up(j - i)) : Mat::Zero(K, K));
      for (int k = j + 1; k <= i + gen.kmax; ++k) h += gen.Q_up(k - i) * chain(G_seq, G, k, j, K);
      out.Hbar[i].push_back(std::move(h));
    }
  }
  return out;
}

std::vector<Mat> forward_F(const Censored& H) {
  std::vector<Mat> F;
  const Eigen::Index K = H.at(0, 0).rows();
  F.push_back(Mat::Identity(K, K));
  for (int j = 1; j <= H.N; ++j) {
    Mat acc = Mat::Zero(K, K);
    for (int i = 0; i < j; ++i) acc += F[i] * H.at(i, j);
    const Mat inv = (-H.at(j, j)).partialPivLu().inverse();
    F.push_back(acc * inv);
  }
  return F;
}

std::vector<RowVec> stationary_levels(const GeneratorView& gen, const Mat& G, int k0, int N) {
  const auto seq = backward_G_sequence(gen, G, k0);
  const Censored H = censored_blocks(gen, seq, G, N);
  const auto F = forward_F(H);
  const RowVec p0 = state_reduction(H.at(0, 0));
  std::vector<RowVec> P;
  double total = 0.0;
  for (int j = 0; j <= N; ++j) {
    P.push_back(p0 * F[j]);
    total += P.back().sum();
  }
  for (auto& p : P) p /= total;
  return P;
}

}  // namespace dense

std::string fingerprint(const SystemConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  auto bytes = [&](const void* p, size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ULL;
    }
  };
  auto num = [&](double x) { bytes(&x, sizeof x); };
  auto integer = [&](std::int64_t x) { bytes(&x, sizeof x); };
  auto mat = [&](const Mat& m) {
    integer(m.rows());
    integer(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) num(m(i, j));
  };
  for (const auto* b : {&cfg.bmap1, &cfg.bmap2}) {
    integer(static_cast<std::int64_t>(b->D.size()));
    for (const auto& d : b->D) mat(d);
  }
  mat(cfg.mmpp.T0);
  mat(Mat(cfg.mmpp.sigma));
  mat(Mat(cfg.service.alpha));
  mat(cfg.service.S);
  integer(cfg.c);
  integer(cfg.g);
  num(cfg.tol.epsilon);
  num(cfg.tol.epsilon0);
  integer(cfg.tol.N_max);
  integer(cfg.tol.max_iter);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace retrialq
