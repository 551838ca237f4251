#include "brute_force.hpp"

#include "error.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <sstream>

namespace retrialq {

namespace {

RowVec solve_sparse(const SpMat& Q) {
  // x Q = 0 with the last equation replaced by x e = 1.
  const Eigen::Index n = Q.rows();
  Eigen::SparseMatrix<double> A = Eigen::SparseMatrix<double>(Q.transpose());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(A.nonZeros() + n));
  for (Eigen::Index col = 0; col < A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
      if (it.row() != n - 1) trip.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index j = 0; j < n; ++j) trip.emplace_back(n - 1, j, 1.0);
  Eigen::SparseMatrix<double> B(n, n);
  B.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(B);
  if (lu.info() != Eigen::Success) throw Error(Status::convergence, "sparse LU failed on the truncated generator");
  Vec rhs = Vec::Zero(n);
  rhs(n - 1) = 1.0;
  Vec x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw Error(Status::convergence, "sparse LU solve failed");
  for (Eigen::Index j = 0; j < n; ++j) x(j) = std::max(x(j), 0.0);
  return (x / x.sum()).transpose();
}

}  // namespace

StationaryDistribution brute_force_ctmc(const SystemConfig& config, const BruteForceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  if (opt.orbit_cap < 1) throw Error(Status::argument, "orbit_cap must be at least 1");
  const GeneratorView gen = build_generator(config);
  const Eigen::Index n = gen.K * (opt.orbit_cap + 1);
  if (n > opt.max_states) {
    std::ostringstream os;
    os << "truncated chain has " << n << " states, above the cap of " << opt.max_states;
    throw Error(Status::budget, os.str());
  }
  const SpMat Q = sparse_truncated(gen, opt.orbit_cap, true);
  const RowVec x = n <= opt.dense_limit ? state_reduction(Mat(Q)) : solve_sparse(Q);

  StationaryDistribution out;
  out.N = opt.orbit_cap;
  out.levels.reserve(opt.orbit_cap + 1);
  for (int i = 0; i <= opt.orbit_cap; ++i) out.levels.push_back(x.segment(gen.K * i, gen.K));
  out.captured_mass = 1.0;
  out.tail_estimate = 0.0;
  out.fingerprint = fingerprint(gen.cfg);
  out.tol = gen.cfg.tol;
  out.index = gen.index;
  out.passes = 1;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

double balance_residual(const GeneratorView& gen, const std::vector<RowVec>& levels) {
  if (levels.empty()) return 0.0;
  const int N = static_cast<int>(levels.size()) - 1;
  const SpMat Q = sparse_truncated(gen, N, false);
  RowVec x(gen.K * (N + 1));
  for (int i = 0; i <= N; ++i) x.segment(gen.K * i, gen.K) = levels[i];
  const RowVec r = x * Q;
  return r.cwiseAbs().maxCoeff();
}

}  // namespace retrialq
