#pragma once

#include "generator.hpp"
#include "models.hpp"

#include <string>
#include <vector>

namespace retrialq {

// Minimal solution of G = Σ_k Y_k G^k. Only columns with busy count 1..g can
// be nonzero; rows with busy count < g equal the retrial shift, and the
// remaining rows reach the level below through busy count g only.
struct GMatrix {
  Eigen::Index K = 0;
  Eigen::Index land_begin = 0;  // first column with busy count 1
  Eigen::Index land_end = 0;    // one past busy count g
  Mat land;                     // K x (land_end - land_begin)
  int iterations = 0;
  double residual = 0;              // last increment, max-row-sum norm
  double fixed_point_residual = 0;  // ||G - Σ Y_k G^k|| of the returned matrix
  double shift_row_deviation = 0;   // low rows versus Y(1)
  double min_row_sum = 0, max_row_sum = 0;
  double contraction = 0;  // observed ratio of successive increments
  bool used_full_iteration = false;
  std::vector<double> history;

  Mat dense() const;
};

GMatrix compute_G(const GeneratorView& gen, double epsilon, int max_iter);

// One-step homogeneity: ||G - (-(Q_{k+1,k+1} + Σ_n Q_{k+1,k+1+n} G^n))^{-1} Q_{k+1,k}||.
double homogeneity_residual(const GeneratorView& gen, const GMatrix& G, int k);

struct K0Choice {
  int k0 = 0;
  double residual = 0;
  bool reached = false;
};

// Smallest k (searched by doubling then bisection up to N_max) whose one-step
// homogeneity residual is at most epsilon. Dense; intended for small K.
K0Choice choose_k0(const GeneratorView& gen, const GMatrix& G, double epsilon, int N_max);

struct SolverOptions {
  int k0_initial = 16;
  double memory_budget_bytes = 3.0e9;
};

struct StationaryDistribution {
  std::vector<RowVec> levels;  // P_0..P_N
  int N = 0;
  double captured_mass = 0;
  double tail_estimate = 0;  // extrapolated mass beyond N
  int k0 = 0;
  double tail_beyond_k0 = 0;
  double homogeneity_residual = 0;  // ||G_{k0-1} - G||
  int g_iterations = 0;
  double g_residual = 0;
  double g_min_row_sum = 0;
  int passes = 0;
  double seconds = 0;
  std::string fingerprint;
  Tolerances tol;
  StateIndex index;

  double joint(int i, int b) const;
  double level_mass(int i) const { return levels.at(i).sum(); }
};

StationaryDistribution stationary(const SystemConfig& config, const SolverOptions& options = {});
StationaryDistribution stationary(const GeneratorView& gen, const SolverOptions& options = {});

// Reference path with explicit dense matrices, for small K.
namespace dense {

std::vector<Mat> backward_G_sequence(const GeneratorView& gen, const Mat& G, int k0);

struct Censored {
  int N = 0;
  std::vector<std::vector<Mat>> Hbar;  // Hbar[i][j - i] for i <= j <= N

  const Mat& at(int i, int j) const { return Hbar.at(i).at(j - i); }
};

Censored censored_blocks(const GeneratorView& gen, const std::vector<Mat>& G_seq, const Mat& G, int N);
std::vector<Mat> forward_F(const Censored& H);
// Levels 0..N normalized to total mass one.
std::vector<RowVec> stationary_levels(const GeneratorView& gen, const Mat& G, int k0, int N);

}  // namespace dense

// Stable 64-bit digest of every numeric input, as hex.
std::string fingerprint(const SystemConfig& config);

}  // namespace retrialq
