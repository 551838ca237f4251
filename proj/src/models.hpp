#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace retrialq {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Batch Markovian arrival process: D[0] hidden transitions, D[k] batches of size k.
struct BmapSpec {
  std::vector<Mat> D;

  int order() const { return D.empty() ? 0 : static_cast<int>(D[0].rows()); }
  int max_batch() const;
  // D_k, or the zero matrix when k exceeds the stored support.
  Mat at(int k) const;
  Mat sum() const;
  Mat eval(double z) const;
  BmapSpec scaled(double s) const;
};

// Retrial modulator: T = T0 + diag(sigma) is a conservative generator.
struct MmppSpec {
  Mat T0;
  Vec sigma;

  int order() const { return static_cast<int>(T0.rows()); }
  Mat T1() const { return sigma.asDiagonal(); }
  Mat T() const { return T0 + T1(); }
  MmppSpec scaled(double s) const { return {T0 * s, sigma * s}; }
};

struct PhSpec {
  RowVec alpha;
  Mat S;

  int order() const { return static_cast<int>(S.rows()); }
  Vec exit_rates() const { return -S.rowwise().sum(); }
};

struct Tolerances {
  double epsilon = 1e-8;   // G residual
  double epsilon0 = 1e-6;  // truncated tail mass
  int N_max = 400;
  int max_iter = 200000;
};

struct SystemConfig {
  BmapSpec bmap1;  // primary class
  BmapSpec bmap2;  // priority class
  MmppSpec mmpp;
  PhSpec service;
  int c = 2;
  int g = 1;
  Tolerances tol;
};

struct Violation {
  std::string item;
  int row = -1;
  std::string rule;
};

std::string to_string(const Violation& v);

std::vector<Violation> validate(const SystemConfig& config);

// Absorbs sub-tolerance row-sum residuals into diagonals; throws on anything
// larger or on any other violation.
SystemConfig validated(const SystemConfig& config);

RowVec stationary_vector(const Mat& generator);
// Elimination kernel without input validation; negative off-diagonal noise is
// treated as zero and the diagonal is ignored.
RowVec state_reduction(const Mat& generator);

double arrival_rate(const BmapSpec& bmap);
double batch_arrival_rate(const BmapSpec& bmap);
double retrial_rate(const MmppSpec& mmpp);
double service_rate(const PhSpec& ph);

struct Rates {
  double lambda1 = 0, lambda2 = 0;
  double lambda_b1 = 0, lambda_b2 = 0;
  double sigma = 0, mu = 0;
};

Rates rates(const SystemConfig& config);

}  // namespace retrialq
