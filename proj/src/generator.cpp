#include "generator.hpp"

#include "error.hpp"

#include <ostream>

namespace retrialq {

using Triplets = std::vector<Eigen::Triplet<double>>;

StateIndex::StateIndex(int c, int R, int W, int V, int M) : c_(c), R_(R), W_(W), V_(V), M_(M) {
  pow_m_.assign(c + 1, 1);
  for (int b = 1; b <= c; ++b) pow_m_[b] = pow_m_[b - 1] * M;
  layout_.offset.assign(c + 2, 0);
  const Eigen::Index rwv = static_cast<Eigen::Index>(R) * W * V;
  for (int b = 0; b <= c; ++b) layout_.offset[b + 1] = layout_.offset[b] + rwv * pow_m_[b];
}

StateIndex::Tuple StateIndex::decode(Eigen::Index flat) const {
  if (flat < 0 || flat >= K()) throw Error(Status::argument, "StateIndex::decode: index out of range");
  Tuple t;
  while (layout_.offset[t.b + 1] <= flat) ++t.b;
  Eigen::Index local = flat - layout_.offset[t.b];
  const Eigen::Index ph = pow_m_[t.b];
  Eigen::Index phase = local % ph;
  Eigen::Index env = local / ph;
  t.gamma = static_cast<int>(env % V_);
  env /= V_;
  t.nu = static_cast<int>(env % W_);
  t.r = static_cast<int>(env / W_);
  t.m.assign(t.b, 0);
  for (int j = t.b - 1; j >= 0; --j) {
    t.m[j] = static_cast<int>(phase % M_);
    phase /= M_;
  }
  return t;
}

Eigen::Index StateIndex::encode(const Tuple& t) const {
  if (t.b < 0 || t.b > c_ || t.r < 0 || t.r >= R_ || t.nu < 0 || t.nu >= W_ || t.gamma < 0 || t.gamma >= V_ ||
      static_cast<int>(t.m.size()) != t.b)
    throw Error(Status::argument, "StateIndex::encode: tuple out of range");
  Eigen::Index phase = 0;
  for (int mj : t.m) {
    if (mj < 0 || mj >= M_) throw Error(Status::argument, "StateIndex::encode: phase out of range");
    phase = phase * M_ + mj;
  }
  const Eigen::Index env = (static_cast<Eigen::Index>(t.r) * W_ + t.nu) * V_ + t.gamma;
  return layout_.offset[t.b] + env * pow_m_[t.b] + phase;
}

Eigen::Index state_space_size(int c, int R, int W, int V, int M) {
  const Eigen::Index rwv = static_cast<Eigen::Index>(R) * W * V;
  if (M == 1) return rwv * (c + 1);
  Eigen::Index mc1 = 1;
  for (int i = 0; i <= c; ++i) mc1 *= M;
  return rwv * (mc1 - 1) / (M - 1);
}

namespace {

void place(Triplets& trip, const SpMat& blk, Eigen::Index r0, Eigen::Index c0, double scale = 1.0) {
  for (Eigen::Index i = 0; i < blk.outerSize(); ++i)
    for (SpMat::InnerIterator it(blk, i); it; ++it)
      if (it.value() != 0.0) trip.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
}

SpMat from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& trip) {
  SpMat m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

bool is_zero(const Mat& a) { return a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0; }

// Building blocks shared by the generator and the generating-function route.
struct Pieces {
  int R, W, V, M;
  SpMat T, S, S0, alpha;
  std::vector<SpMat> S_sum;    // S^{⊕l}
  std::vector<SpMat> S0_sum;   // S0^{⊕l}
  std::vector<SpMat> alpha_p;  // ς^{⊗r}
  std::vector<Eigen::Index> Mp;

  explicit Pieces(const SystemConfig& cfg) {
    R = cfg.mmpp.order();
    W = cfg.bmap1.order();
    V = cfg.bmap2.order();
    M = cfg.service.order();
    T = sparse(cfg.mmpp.T());
    S = sparse(cfg.service.S);
    S0 = sparse(Mat(cfg.service.exit_rates()));
    alpha = sparse(Mat(cfg.service.alpha));
    const int c = cfg.c;
    Mp.assign(c + 1, 1);
    for (int l = 1; l <= c; ++l) Mp[l] = Mp[l - 1] * M;
    for (int l = 0; l <= c; ++l) {
      S_sum.push_back(l == 0 ? SpMat(1, 1) : kron_power_sum(S, l));
      S0_sum.push_back(l == 0 ? SpMat(1, 1) : kron_power_sum(S0, l));
      alpha_p.push_back(kron_power(alpha, l));
    }
  }

  // T ⊕ Dm ⊕ Em ⊕ S^{⊕l}
  SpMat diag_block(const Mat& Dm, const Mat& Em, int l) const {
    const Eigen::Index ml = Mp[l];
    SpMat out = kron(T, speye(W * V * ml));
    out += kron(speye(R), kron(sparse(Dm), speye(V * ml)));
    out += kron(speye(R * W), kron(sparse(Em), speye(ml)));
    out += kron(speye(R * W * V), S_sum[l]);
    return out;
  }

  // I_R ⊗ (Dr ⊕ Er) ⊗ I_{M^l} ⊗ ς^{⊗r}
  SpMat joint_admit(const Mat& Dr, const Mat& Er, int l, int r) const {
    SpMat both = kron(sparse(Dr), speye(V)) + kron(speye(W), sparse(Er));
    return kron_chain({speye(R), both, speye(Mp[l]), alpha_p[r]});
  }

  // I_RW ⊗ Er ⊗ I_{M^l} ⊗ ς^{⊗r}
  SpMat priority_admit(const Mat& Er, int l, int r) const {
    return kron_chain({speye(R * W), sparse(Er), speye(Mp[l]), alpha_p[r]});
  }

  // I_R ⊗ Dk ⊗ I_{V M^l} ⊗ ς^{⊗r}
  SpMat primary_admit(const Mat& Dk, int l, int r) const {
    return kron_chain({speye(R), sparse(Dk), speye(V * Mp[l]), alpha_p[r]});
  }

  SpMat service_down(int l) const { return kron(speye(R * W * V), S0_sum[l]); }
};

}  // namespace

SpMat GeneratorView::Q_diag(int i) const {
  SpMat out = Gamma0;
  if (i != 0) {
    for (Eigen::Index r = 0; r < low_size(); ++r) out.coeffRef(r, r) -= static_cast<double>(i) * ret(r);
  }
  return out;
}

Vec GeneratorView::Ihat() const {
  Vec v = Vec::Zero(K);
  v.head(low_size()).setOnes();
  return v;
}

Vec GeneratorView::Ibar() const { return Vec::Ones(K) - Ihat(); }

SpMat GeneratorView::Upsilon() const {
  Triplets trip;
  for (Eigen::Index i = 0; i < Qd.outerSize(); ++i)
    for (SpMat::InnerIterator it(Qd, i); it; ++it) trip.emplace_back(it.row(), it.col(), it.value() / ret(it.row()));
  return from_triplets(K, K, trip);
}

GeneratorView build_generator(const SystemConfig& config) {
  GeneratorView gen;
  gen.cfg = validated(config);
  const SystemConfig& cfg = gen.cfg;
  const Pieces p(cfg);
  const int c = cfg.c, g = cfg.g;
  gen.index = StateIndex(c, p.R, p.W, p.V, p.M);
  gen.K = gen.index.K();
  const auto& idx = gen.index;
  const auto& D = cfg.bmap1;
  const auto& E = cfg.bmap2;
  gen.kmax = std::max(D.max_batch(), E.max_batch());

  Triplets g0;
  for (int l = 0; l <= c; ++l) {
    const Eigen::Index r0 = idx.offset(l);
    if (l >= 1) place(g0, p.service_down(l), r0, idx.offset(l - 1));
    place(g0, p.diag_block(D.at(0), E.at(0), l), r0, r0);
    for (int r = 1; r <= c - l; ++r) {
      const Mat Er = E.at(r);
      if (l <= g - 1 && r <= g - l) {
        const Mat Dr = D.at(r);
        if (!is_zero(Dr) || !is_zero(Er)) place(g0, p.joint_admit(Dr, Er, l, r), r0, idx.offset(l + r));
      } else if (!is_zero(Er)) {
        place(g0, p.priority_admit(Er, l, r), r0, idx.offset(l + r));
      }
    }
  }
  gen.Gamma0 = from_triplets(gen.K, gen.K, g0);

  gen.ret = Vec::Zero(gen.K);
  Triplets qd;
  const SpMat T1 = sparse(cfg.mmpp.T1());
  for (int l = 0; l <= g - 1; ++l) {
    const Eigen::Index wvm = static_cast<Eigen::Index>(p.W) * p.V * p.Mp[l];
    for (int r = 0; r < p.R; ++r) gen.ret.segment(idx.offset(l) + r * wvm, wvm).setConstant(cfg.mmpp.sigma(r));
    place(qd, kron_chain({T1, speye(wvm), p.alpha}), idx.offset(l), idx.offset(l + 1));
  }
  gen.Qd = from_triplets(gen.K, gen.K, qd);

  for (int k = 1; k <= gen.kmax; ++k) {
    Triplets up;
    for (int l = 0; l <= c; ++l) {
      const Eigen::Index r0 = idx.offset(l);
      if (l < g) {
        const Mat Dk = D.at(k + g - l);
        if (!is_zero(Dk)) place(up, p.primary_admit(Dk, l, g - l), r0, idx.offset(g));
      } else {
        const Mat Dk = D.at(k);
        if (!is_zero(Dk)) place(up, p.primary_admit(Dk, l, 0), r0, r0);
      }
      const Mat Ek = E.at(k + c - l);
      if (!is_zero(Ek)) place(up, p.priority_admit(Ek, l, c - l), r0, idx.offset(c));
    }
    gen.Up.push_back(from_triplets(gen.K, gen.K, up));
  }

  gen.Delta = -Vec(gen.Gamma0.diagonal());
  if (!(gen.Delta.minCoeff() > 0.0))
    throw Error(Status::invalid_config, "generator has a state with no outgoing transitions");
  return gen;
}

std::vector<SpMat> limiting_blocks(const GeneratorView& gen) {
  const Vec ibar = gen.Ibar();
  const Vec scale = ibar.cwiseQuotient(gen.Delta);
  std::vector<SpMat> Y;
  Y.push_back(gen.Upsilon());
  SpMat y1 = scale.asDiagonal() * gen.Gamma0;
  SpMat ib(gen.K, gen.K);
  {
    Triplets trip;
    for (Eigen::Index i = 0; i < gen.K; ++i)
      if (ibar(i) != 0.0) trip.emplace_back(i, i, 1.0);
    ib.setFromTriplets(trip.begin(), trip.end());
  }
  y1 += ib;
  y1.prune(0.0);
  y1.makeCompressed();
  Y.push_back(y1);
  for (const auto& up : gen.Up) {
    SpMat yk = scale.asDiagonal() * up;
    yk.prune(0.0);
    yk.makeCompressed();
    Y.push_back(yk);
  }
  return Y;
}

Mat eval_Y_series(const GeneratorView& gen, double z) {
  if (!(z > 0.0 && z <= 1.0)) throw Error(Status::argument, "eval_Y: z must lie in (0,1]");
  const auto Y = limiting_blocks(gen);
  Mat out = Mat::Zero(gen.K, gen.K);
  double zk = 1.0;
  for (const auto& y : Y) {
    out += zk * Mat(y);
    zk *= z;
  }
  return out;
}

namespace {

// z^{-n} (F(z) - Σ_{k<n} F_k z^k)
Mat shifted_tail(const BmapSpec& f, int n, double z) {
  Mat head = Mat::Zero(f.order(), f.order());
  double zk = 1.0;
  for (int k = 0; k < n; ++k) {
    head += zk * f.at(k);
    zk *= z;
  }
  return (f.eval(z) - head) / std::pow(z, n);
}

}  // namespace

Mat eval_Y(const GeneratorView& gen, double z) {
  if (!(z > 0.0 && z <= 1.0)) throw Error(Status::argument, "eval_Y: z must lie in (0,1]");
  return eval_Y_unchecked(gen, z);
}

// Any z > 0; the batch supports are finite so Y(z) is a polynomial.
Mat eval_Y_unchecked(const GeneratorView& gen, double z) {
  const SystemConfig& cfg = gen.cfg;
  const Pieces p(cfg);
  const int c = cfg.c, g = cfg.g;
  const auto& idx = gen.index;
  const auto& D = cfg.bmap1;
  const auto& E = cfg.bmap2;
  const Mat Dz = D.eval(z), Ez = E.eval(z);

  Triplets trip;
  for (int l = 0; l <= c; ++l) {
    const Eigen::Index r0 = idx.offset(l);
    if (l >= 1) place(trip, p.service_down(l), r0, idx.offset(l - 1));
    if (l <= g - 1) {
      place(trip, p.diag_block(D.at(0), E.at(0), l), r0, r0);
      // Ξ_{g-l}(z)
      const int n = g - l;
      SpMat xi = kron(speye(p.W), kron(sparse(E.at(n)), speye(p.Mp[l]))) +
                 kron(sparse(shifted_tail(D, n, z)), speye(p.V * p.Mp[l]));
      place(trip, kron_chain({speye(p.R), xi, p.alpha_p[n]}), r0, idx.offset(g));
      for (int r = 1; r <= g - 1 - l; ++r) place(trip, p.joint_admit(D.at(r), E.at(r), l, r), r0, idx.offset(l + r));
      for (int r = g + 1 - l; r <= c - 1 - l; ++r) place(trip, p.priority_admit(E.at(r), l, r), r0, idx.offset(l + r));
    } else {
      // Θ_l(z)
      place(trip, p.diag_block(Dz, l == c ? Ez : E.at(0), l), r0, r0);
      for (int r = 1; r <= c - 1 - l; ++r) place(trip, p.priority_admit(E.at(r), l, r), r0, idx.offset(l + r));
    }
    if (l <= c - 1) {
      // Ψ_{c-l}(z)
      const int n = c - l;
      place(trip, p.priority_admit(shifted_tail(E, n, z), l, n), r0, idx.offset(c));
    }
  }
  const Mat gamma_z = Mat(from_triplets(gen.K, gen.K, trip));
  const Vec ibar = gen.Ibar();
  Mat out = Mat(gen.Upsilon());
  out.diagonal() += z * ibar;
  out += z * (ibar.cwiseQuotient(gen.Delta)).asDiagonal() * gamma_z;
  return out;
}

Mat Y22(const GeneratorView& gen, double z) {
  const Eigen::Index start = gen.index.offset(gen.g() - 1);
  const Eigen::Index n = gen.K - start;
  return eval_Y(gen, z).bottomRightCorner(n, n);
}

SpMat sparse_truncated(const GeneratorView& gen, int N, bool conservative) {
  const Eigen::Index K = gen.K;
  const Eigen::Index n = K * (N + 1);
  Triplets trip;
  for (int i = 0; i <= N; ++i) {
    const Eigen::Index r0 = K * i;
    if (i >= 1) place(trip, gen.Qd, r0, r0 - K, static_cast<double>(i));
    place(trip, gen.Q_diag(i), r0, r0);
    for (int k = 1; k <= gen.kmax; ++k) {
      if (i + k <= N) {
        place(trip, gen.Up[k - 1], r0, r0 + K * k);
      } else if (conservative) {
        const Vec lost = gen.Up[k - 1] * Vec::Ones(K);
        for (Eigen::Index s = 0; s < K; ++s)
          if (lost(s) != 0.0) trip.emplace_back(r0 + s, r0 + s, lost(s));
      }
    }
  }
  return from_triplets(n, n, trip);
}

Mat dense_truncated(const GeneratorView& gen, int N, bool conservative) {
  return Mat(sparse_truncated(gen, N, conservative));
}

void dump_block_csv(std::ostream& os, const SpMat& m, const StateIndex& index, int l, int lp) {
  const Eigen::Index r0 = index.offset(l), c0 = index.offset(lp);
  const Eigen::Index nr = index.size(l), nc = index.size(lp);
  os << "row,col,value\n";
  const auto old = os.precision(17);
  for (Eigen::Index i = r0; i < r0 + nr; ++i)
    for (SpMat::InnerIterator it(m, i); it; ++it)
      if (it.col() >= c0 && it.col() < c0 + nc) os << (i - r0) << ',' << (it.col() - c0) << ',' << it.value() << '\n';
  os.precision(old);
}

}  // namespace retrialq
