#pragma once

#include "models.hpp"

#include <vector>

namespace retrialq {

Mat kron(const Mat& a, const Mat& b);
Mat kron_sum(const Mat& a, const Mat& b);
// A^{⊗l}; the empty product is the 1x1 matrix [1].
Mat kron_power(const Mat& a, int l);
// Σ_{m<l} I_{n^m} ⊗ A ⊗ I_{n^{l-m-1}} with n = rows(A); A may be rectangular.
Mat kron_power_sum(const Mat& a, int l);

SpMat sparse(const Mat& a);
SpMat speye(Eigen::Index n);
SpMat kron(const SpMat& a, const SpMat& b);
SpMat kron_sum(const SpMat& a, const SpMat& b);
SpMat kron_power(const SpMat& a, int l);
SpMat kron_power_sum(const SpMat& a, int l);
// Left-to-right Kronecker chain.
SpMat kron_chain(const std::vector<SpMat>& factors);

Vec solve_linear(const Mat& a, const Vec& b);
RowVec solve_null_left(const Mat& a);

// Partition of a flat index range into consecutive blocks.
struct BlockLayout {
  std::vector<Eigen::Index> offset;  // size blocks+1

  int blocks() const { return static_cast<int>(offset.size()) - 1; }
  Eigen::Index size(int l) const { return offset[l + 1] - offset[l]; }
  Eigen::Index begin(int l) const { return offset[l]; }
  Eigen::Index total() const { return offset.back(); }
};

Mat dense_block(const SpMat& m, const BlockLayout& rows, int l, const BlockLayout& cols, int lp);

}  // namespace retrialq
