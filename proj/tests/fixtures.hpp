#pragma once

#include "models.hpp"

#include <random>

namespace retrialq::fixtures {

// Cellular network instance: originating calls, handoff calls, two-state
// retrial modulator and a two-phase service law.
inline SystemConfig cellular(int c, int g, double lo, double lh, double lr) {
  SystemConfig cfg;
  Mat d0(2, 2), d1(2, 2), e0(2, 2), e1(2, 2), t0(2, 2), s(2, 2);
  d0 << -11, 2, 5, -20;
  d1 << 8, 1, 3, 12;
  e0 << -3, 0, 1, -2;
  e1 << 1, 2, 0, 1;
  t0 << -15, 3, 4, -19;
  s << -23, 9, 14, -17;
  cfg.bmap1.D = {lo * d0, lo * d1};
  cfg.bmap2.D = {lh * e0, lh * e1};
  cfg.mmpp.T0 = lr * t0;
  cfg.mmpp.sigma = Vec(2);
  cfg.mmpp.sigma << 12 * lr, 15 * lr;
  cfg.service.S = s;
  cfg.service.alpha = RowVec(2);
  cfg.service.alpha << 0.4, 0.6;
  cfg.c = c;
  cfg.g = g;
  return cfg;
}

// Same arrival and retrial processes with exponential service at rate mu.
inline SystemConfig cellular_exponential(int c, int g, double lo, double lh, double lr, double mu) {
  SystemConfig cfg = cellular(c, g, lo, lh, lr);
  cfg.service.S = Mat::Constant(1, 1, -mu);
  cfg.service.alpha = RowVec::Ones(1);
  return cfg;
}

inline BmapSpec poisson(double rate) {
  BmapSpec b;
  b.D = {Mat::Constant(1, 1, -rate), Mat::Constant(1, 1, rate)};
  return b;
}

// Scalar model: Poisson classes, constant retrial rate, exponential service.
inline SystemConfig scalar(int c, int g, double l1, double l2, double sigma, double mu) {
  SystemConfig cfg;
  cfg.bmap1 = poisson(l1);
  cfg.bmap2 = poisson(l2);
  cfg.mmpp.T0 = Mat::Constant(1, 1, -sigma);
  cfg.mmpp.sigma = Vec::Constant(1, sigma);
  cfg.service.S = Mat::Constant(1, 1, -mu);
  cfg.service.alpha = RowVec::Ones(1);
  cfg.c = c;
  cfg.g = g;
  return cfg;
}

// Light-to-moderate load scalar instance drawn from rng.
inline SystemConfig random_scalar(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> cdist(3, 6);
  const int c = cdist(rng);
  std::uniform_int_distribution<int> gdist(1, c - 1);
  const int g = gdist(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double mu = 0.5 + 1.5 * u(rng);
  const double load = 0.15 + 0.35 * u(rng);
  const double share = 0.3 + 0.5 * u(rng);
  const double l1 = load * share * g * mu;
  const double l2 = load * (1.0 - share) * c * mu;
  const double sigma = 0.5 + 4.0 * u(rng);
  return scalar(c, g, l1, l2, sigma, mu);
}

// Random small instance with nontrivial phases in every process.
inline SystemConfig random_small(std::mt19937_64& rng, int c, int g, int M, int batches) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  auto bmap = [&](int order, double scale) {
    BmapSpec b;
    b.D.assign(batches + 1, Mat::Zero(order, order));
    for (int k = 1; k <= batches; ++k)
      for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j) b.D[k](i, j) = scale * u(rng) / (k * k);
    for (int i = 0; i < order; ++i) {
      for (int j = 0; j < order; ++j)
        if (i != j) b.D[0](i, j) = u(rng);
      double rs = 0.0;
      for (int k = 0; k <= batches; ++k) rs += b.D[k].row(i).sum();
      b.D[0](i, i) = -rs;
    }
    return b;
  };
  SystemConfig cfg;
  cfg.bmap1 = bmap(2, 0.3);
  cfg.bmap2 = bmap(2, 0.2);
  cfg.mmpp.T0 = Mat::Zero(2, 2);
  cfg.mmpp.sigma = Vec(2);
  cfg.mmpp.sigma << 1.0 + u(rng), 2.0 + u(rng);
  cfg.mmpp.T0(0, 1) = u(rng);
  cfg.mmpp.T0(1, 0) = u(rng);
  for (int i = 0; i < 2; ++i) cfg.mmpp.T0(i, i) = -cfg.mmpp.T0(i, 1 - i) - cfg.mmpp.sigma(i);
  cfg.service.S = Mat::Zero(M, M);
  cfg.service.alpha = RowVec::Zero(M);
  for (int i = 0; i < M; ++i) {
    cfg.service.alpha(i) = u(rng);
    double out = 0.0;
    for (int j = 0; j < M; ++j)
      if (i != j) {
        cfg.service.S(i, j) = 0.5 * u(rng);
        out += cfg.service.S(i, j);
      }
    cfg.service.S(i, i) = -(out + 1.0 + u(rng));
  }
  cfg.service.alpha /= cfg.service.alpha.sum();
  cfg.c = c;
  cfg.g = g;
  return cfg;
}

}  // namespace retrialq::fixtures
