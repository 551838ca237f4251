#include "kron.hpp"

#include "error.hpp"

#include <cmath>

namespace retrialq {

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat kron_sum(const Mat& a, const Mat& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) throw Error(Status::argument, "kron_sum: operands must be square");
  return kron(a, Mat::Identity(b.rows(), b.rows())) + kron(Mat::Identity(a.rows(), a.rows()), b);
}

Mat kron_power(const Mat& a, int l) {
  if (l < 0) throw Error(Status::argument, "kron_power: negative exponent");
  Mat out = Mat::Ones(1, 1);
  for (int i = 0; i < l; ++i) out = kron(out, a);
  return out;
}

Mat kron_power_sum(const Mat& a, int l) {
  if (l < 0) throw Error(Status::argument, "kron_power_sum: negative exponent");
  const Eigen::Index n = a.rows();
  if (l == 0) return Mat::Zero(1, 1);
  Mat out;
  for (int m = 0; m < l; ++m) {
    const auto left = static_cast<Eigen::Index>(std::llround(std::pow(n, m)));
    const auto right = static_cast<Eigen::Index>(std::llround(std::pow(n, l - m - 1)));
    Mat term = kron(kron(Mat::Identity(left, left), a), Mat::Identity(right, right));
    if (m == 0)
      out = term;
    else
      out += term;
  }
  return out;
}

SpMat sparse(const Mat& a) {
  SpMat s = a.sparseView(0.0, 0.0);
  s.makeCompressed();
  return s;
}

SpMat speye(Eigen::Index n) {
  SpMat s(n, n);
  s.setIdentity();
  return s;
}

SpMat kron(const SpMat& a, const SpMat& b) {
  const Eigen::Index br = b.rows(), bc = b.cols();
  SpMat out(a.rows() * br, a.cols() * bc);
  Eigen::VectorXi nnz(out.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const int ai = static_cast<int>(a.outerIndexPtr()[i + 1] - a.outerIndexPtr()[i]);
    for (Eigen::Index p = 0; p < br; ++p)
      nnz(i * br + p) = ai * static_cast<int>(b.outerIndexPtr()[p + 1] - b.outerIndexPtr()[p]);
  }
  out.reserve(nnz);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index p = 0; p < br; ++p)
      for (SpMat::InnerIterator ia(a, i); ia; ++ia)
        for (SpMat::InnerIterator ib(b, p); ib; ++ib)
          out.insert(i * br + p, ia.col() * bc + ib.col()) = ia.value() * ib.value();
  out.makeCompressed();
  return out;
}

SpMat kron_sum(const SpMat& a, const SpMat& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) throw Error(Status::argument, "kron_sum: operands must be square");
  SpMat out = kron(a, speye(b.rows())) + kron(speye(a.rows()), b);
  out.makeCompressed();
  return out;
}

SpMat kron_power(const SpMat& a, int l) {
  if (l < 0) throw Error(Status::argument, "kron_power: negative exponent");
  SpMat out = speye(1);
  for (int i = 0; i < l; ++i) out = kron(out, a);
  return out;
}

SpMat kron_power_sum(const SpMat& a, int l) {
  if (l < 0) throw Error(Status::argument, "kron_power_sum: negative exponent");
  const Eigen::Index n = a.rows();
  if (l == 0) return SpMat(1, 1);
  SpMat out;
  Eigen::Index left = 1;
  for (int m = 0; m < l; ++m) {
    Eigen::Index right = 1;
    for (int k = 0; k < l - m - 1; ++k) right *= n;
    SpMat term = kron(kron(speye(left), a), speye(right));
    if (m == 0)
      out = term;
    else
      out += term;
    left *= n;
  }
  out.makeCompressed();
  return out;
}

SpMat kron_chain(const std::vector<SpMat>& factors) {
  SpMat out = speye(1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

Vec solve_linear(const Mat& a, const Vec& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw Error(Status::argument, "solve_linear: dimension mismatch");
  Eigen::FullPivLU<Mat> lu(a);
  if (!lu.isInvertible()) throw Error(Status::internal, "solve_linear: matrix is singular to working precision");
  Vec x = lu.solve(b);
  const double scale = std::max(a.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  const double res = (a * x - b).cwiseAbs().maxCoeff();
  if (!(res <= 1e-10 * scale * std::max(1.0, x.cwiseAbs().maxCoeff())))
    throw Error(Status::internal, "solve_linear: residual above tolerance");
  return x;
}

RowVec solve_null_left(const Mat& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw Error(Status::argument, "solve_null_left: matrix must be square");
  const Eigen::Index n = a.rows();
  // Replace one equation by the normalization row.
  Mat m = a.transpose();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::FullPivLU<Mat> probe(m);
  probe.setThreshold(1e-10);
  if (probe.dimensionOfKernel() != 1) throw Error(Status::internal, "solve_null_left: left null space is not one-dimensional");
  Eigen::Index drop = 0;
  double best = -1.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    Mat trial = m;
    trial.row(r).setOnes();
    Eigen::FullPivLU<Mat> lu(trial);
    if (lu.isInvertible()) {
      const double rc = lu.rcond();
      if (rc > best) {
        best = rc;
        drop = r;
      }
      if (rc > 1e-6) break;
    }
  }
  m.row(drop).setOnes();
  Vec rhs = Vec::Zero(n);
  rhs(drop) = 1.0;
  RowVec x = Eigen::FullPivLU<Mat>(m).solve(rhs).transpose();
  if (!((x * a).cwiseAbs().maxCoeff() <= 1e-10 * scale * n))
    throw Error(Status::internal, "solve_null_left: residual above tolerance");
  return x / x.sum();
}

Mat dense_block(const SpMat& m, const BlockLayout& rows, int l, const BlockLayout& cols, int lp) {
  return Mat(m.block(rows.begin(l), cols.begin(lp), rows.size(l), cols.size(lp)));
}

}  // namespace retrialq
