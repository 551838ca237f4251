#pragma once

#include "kron.hpp"
#include "models.hpp"

#include <iosfwd>
#include <vector>

namespace retrialq {

// Flat index <-> (b, r, nu, gamma, m_1..m_b) within one level; r is the most
// significant digit, then nu, gamma, then server phases with m_1 leading.
class StateIndex {
 public:
  struct Tuple {
    int b = 0, r = 0, nu = 0, gamma = 0;
    std::vector<int> m;
    bool operator==(const Tuple&) const = default;
  };

  StateIndex() = default;
  StateIndex(int c, int R, int W, int V, int M);

  Eigen::Index K() const { return layout_.total(); }
  const BlockLayout& layout() const { return layout_; }
  Eigen::Index offset(int b) const { return layout_.begin(b); }
  Eigen::Index size(int b) const { return layout_.size(b); }
  Eigen::Index phases(int b) const { return pow_m_[b]; }
  int c() const { return c_; }

  Tuple decode(Eigen::Index flat) const;
  Eigen::Index encode(const Tuple& t) const;

 private:
  int c_ = 0, R_ = 0, W_ = 0, V_ = 0, M_ = 0;
  BlockLayout layout_;
  std::vector<Eigen::Index> pow_m_;
};

// Closed form RWV(1-M^{c+1})/(1-M), with the M = 1 limit RWV(c+1).
Eigen::Index state_space_size(int c, int R, int W, int V, int M);

// Level-structured generator: Q_{i,i-1} = i*Qd, Q_{i,i} = Gamma0 - i*diag(ret),
// Q_{i,i+k} = Up[k-1].
struct GeneratorView {
  SystemConfig cfg;
  StateIndex index;
  Eigen::Index K = 0;
  int kmax = 0;
  SpMat Gamma0;
  Vec ret;
  SpMat Qd;
  std::vector<SpMat> Up;
  Vec Delta;  // -diag(Gamma0), strictly positive

  int c() const { return cfg.c; }
  int g() const { return cfg.g; }
  // First flat index of the guard region (busy count >= g).
  Eigen::Index low_size() const { return index.offset(cfg.g); }

  SpMat Q_down(int i) const { return static_cast<double>(i) * Qd; }
  SpMat Q_diag(int i) const;
  const SpMat& Q_up(int k) const { return Up.at(k - 1); }
  Vec Lambda(int i) const { return Delta + static_cast<double>(i) * ret; }
  Vec Ihat() const;
  Vec Ibar() const;
  SpMat Upsilon() const;
};

GeneratorView build_generator(const SystemConfig& config);

// Y_0..Y_{kmax+1}.
std::vector<SpMat> limiting_blocks(const GeneratorView& gen);

// Assembled from the closed-form generating function Gamma(z).
Mat eval_Y(const GeneratorView& gen, double z);
// Same construction for any z > 0 (finite batch support makes Y a polynomial).
Mat eval_Y_unchecked(const GeneratorView& gen, double z);
// Σ_k Y_k z^k from the assembled limiting blocks.
Mat eval_Y_series(const GeneratorView& gen, double z);
// Trailing diagonal block of Y(z) over busy counts g-1..c.
Mat Y22(const GeneratorView& gen, double z);

// Q truncated to levels 0..N. With conservative = true, transitions leaving
// the truncation are folded back into the diagonal.
Mat dense_truncated(const GeneratorView& gen, int N, bool conservative);
SpMat sparse_truncated(const GeneratorView& gen, int N, bool conservative);

// (row, col, value) lines for the nonzeros of block (l, lp).
void dump_block_csv(std::ostream& os, const SpMat& m, const StateIndex& index, int l, int lp);

}  // namespace retrialq
