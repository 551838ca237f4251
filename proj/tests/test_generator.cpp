#include "doctest.h"
#include "fixtures.hpp"
#include "generator.hpp"

#include <random>
#include <sstream>

using namespace retrialq;

namespace {

double max_row_sum(const GeneratorView& gen, int i) {
  Vec rs = gen.Q_diag(i) * Vec::Ones(gen.K);
  if (i > 0) rs += gen.Q_down(i) * Vec::Ones(gen.K);
  for (int k = 1; k <= gen.kmax; ++k) rs += gen.Q_up(k) * Vec::Ones(gen.K);
  return rs.cwiseAbs().maxCoeff();
}

double min_offdiag(const SpMat& m, bool skip_diag) {
  double lo = 0.0;
  for (Eigen::Index i = 0; i < m.outerSize(); ++i)
    for (SpMat::InnerIterator it(m, i); it; ++it)
      if (!(skip_diag && it.row() == it.col())) lo = std::min(lo, it.value());
  return lo;
}

}  // namespace

TEST_CASE("state-space size") {
  CHECK(state_space_size(8, 2, 2, 2, 2) == 4088);
  CHECK(state_space_size(10, 2, 2, 2, 2) == 16376);
  CHECK(state_space_size(10, 1, 1, 1, 1) == 11);
  CHECK(StateIndex(8, 2, 2, 2, 2).K() == 4088);
  CHECK(StateIndex(10, 2, 2, 2, 2).K() == 16376);
  CHECK(build_generator(fixtures::cellular(8, 6, 2, 2, 2)).K == 4088);
}

TEST_CASE("state index round trip and segment bounds") {
  const StateIndex idx(4, 2, 3, 2, 3);
  for (Eigen::Index f = 0; f < idx.K(); ++f) REQUIRE(idx.encode(idx.decode(f)) == f);
  const int RWV = 12;
  for (int b = 0; b <= 4; ++b) {
    Eigen::Index geo = 0, pw = 1;
    for (int j = 0; j < b; ++j) {
      geo += pw;
      pw *= 3;
    }
    CHECK(idx.offset(b) == RWV * geo);
    CHECK(idx.decode(idx.offset(b)).b == b);
    CHECK(idx.decode(idx.offset(b) + idx.size(b) - 1).b == b);
  }
  StateIndex::Tuple t{2, 1, 2, 0, {2, 1}};
  const auto f = idx.encode(t);
  CHECK(idx.decode(f) == t);
  // r most significant, last server phase least significant.
  StateIndex::Tuple t2 = t;
  t2.m[1] = 2;
  CHECK(idx.encode(t2) == f + 1);
}

TEST_CASE("generator is conservative with nonnegative off-diagonals") {
  std::mt19937_64 rng(21);
  std::vector<SystemConfig> cfgs = {fixtures::cellular(8, 6, 2, 2, 2), fixtures::cellular(4, 1, 1, 3, 0.5),
                                    fixtures::random_small(rng, 4, 2, 2, 3), fixtures::random_small(rng, 3, 1, 3, 2),
                                    fixtures::scalar(5, 3, 1, 2, 3, 1)};
  for (const auto& cfg : cfgs) {
    const auto gen = build_generator(cfg);
    for (int i : {0, 1, 5}) CHECK(max_row_sum(gen, i) <= 1e-9);
    CHECK(min_offdiag(gen.Gamma0, true) >= 0.0);
    CHECK(min_offdiag(gen.Qd, false) >= 0.0);
    for (const auto& up : gen.Up) CHECK(min_offdiag(up, false) >= 0.0);
    CHECK(gen.Delta.minCoeff() > 0.0);
  }
}

TEST_CASE("level structure") {
  std::mt19937_64 rng(2);
  const auto gen = build_generator(fixtures::random_small(rng, 4, 2, 2, 2));
  CHECK(gen.kmax == 2);
  // Up blocks carry no level index, so they are shared objects; compare the
  // assembled truncated rows at several levels instead.
  const Mat Q = dense_truncated(gen, 9, false);
  const Eigen::Index K = gen.K;
  for (int k = 1; k <= gen.kmax; ++k) {
    const Mat ref = Q.block(0, K * k, K, K);
    for (int i : {3, 7}) CHECK((Q.block(K * i, K * (i + k), K, K) - ref).cwiseAbs().maxCoeff() == 0.0);
  }
  const Mat d1 = Mat(gen.Q_down(1));
  for (int i : {2, 5}) {
    const Mat scaled = static_cast<double>(i) * d1;
    CHECK(Mat(gen.Q_down(i)) == scaled);
  }
  for (int i : {0, 1, 5}) {
    const Mat lam = gen.Lambda(i);
    CHECK((lam + Mat(gen.Q_diag(i)).diagonal()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("truncated generator has zero row sums except the last level") {
  const auto gen = build_generator(fixtures::scalar(4, 2, 1.0, 0.7, 2.0, 1.3));
  const int N = 30;
  const Mat Q = dense_truncated(gen, N, false);
  const Vec rs = Q.rowwise().sum();
  CHECK(rs.head(gen.K * N).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(rs.tail(gen.K).cwiseAbs().maxCoeff() > 0.0);
  const Mat Qc = dense_truncated(gen, N, true);
  CHECK(Qc.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("primary admissions fill only the non-guard servers") {
  // c = 3, g = 1, scalar model: a primary arrival with one server free of the
  // non-guard pool is admitted; one that finds g busy goes to the orbit.
  const auto gen = build_generator(fixtures::scalar(3, 1, 2.0, 0.5, 1.0, 1.0));
  const Mat G0 = Mat(gen.Gamma0), U1 = Mat(gen.Up[0]);
  CHECK(G0(0, 1) == doctest::Approx(2.5));  // both classes from idle
  CHECK(G0(1, 2) == doctest::Approx(0.5));  // priority only once g busy
  CHECK(U1(1, 1) == doctest::Approx(2.0));  // primary to orbit
  CHECK(U1(3, 3) == doctest::Approx(2.5));  // everything to orbit when full
  CHECK(Mat(gen.Qd)(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("limiting blocks are stochastic and nonnegative") {
  std::mt19937_64 rng(8);
  for (const auto& cfg : {fixtures::cellular(5, 3, 2, 2, 2), fixtures::random_small(rng, 4, 2, 2, 3)}) {
    const auto gen = build_generator(cfg);
    const auto Y = limiting_blocks(gen);
    CHECK(static_cast<int>(Y.size()) == gen.kmax + 2);
    Vec rs = Vec::Zero(gen.K);
    for (const auto& y : Y) {
      rs += y * Vec::Ones(gen.K);
      CHECK(min_offdiag(y, false) >= 0.0);
    }
    CHECK((rs - Vec::Ones(gen.K)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((eval_Y(gen, 1.0).rowwise().sum() - Vec::Ones(gen.K)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("retrial rows of Y0 are a single shift by the entrance vector") {
  const auto gen = build_generator(fixtures::cellular(5, 3, 2, 2, 2));
  const Mat Y0 = Mat(limiting_blocks(gen)[0]);
  const auto& idx = gen.index;
  const RowVec alpha = gen.cfg.service.alpha;
  for (int l = 0; l <= 2; ++l) {
    const Eigen::Index n = idx.size(l);
    const Mat blk = Y0.block(idx.offset(l), idx.offset(l + 1), n, idx.size(l + 1));
    CHECK((blk - kron(Mat::Identity(n, n), Mat(alpha))).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(Y0.block(idx.offset(l), 0, n, gen.K).sum() == doctest::Approx(static_cast<double>(n)));
  }
  CHECK(Y0.bottomRows(gen.K - gen.low_size()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generating function matches the series") {
  std::mt19937_64 rng(13);
  for (const auto& cfg : {fixtures::random_small(rng, 4, 2, 2, 3), fixtures::random_small(rng, 3, 1, 2, 2),
                          fixtures::cellular(4, 3, 1, 2, 3)}) {
    const auto gen = build_generator(cfg);
    for (double z : {0.5, 0.9, 1.0}) CHECK((eval_Y(gen, z) - eval_Y_series(gen, z)).cwiseAbs().maxCoeff() <= 1e-10);
  }
  const auto gen = build_generator(fixtures::scalar(3, 2, 1, 1, 1, 1));
  CHECK_THROWS(eval_Y(gen, 0.0));
  CHECK_THROWS(eval_Y(gen, 1.5));
}

TEST_CASE("reducible normal form at z = 1") {
  const auto gen = build_generator(fixtures::cellular(5, 4, 1, 1, 1));
  const Mat Y = eval_Y(gen, 1.0);
  const auto& idx = gen.index;
  const Eigen::Index split = idx.offset(gen.g() - 1);
  // Lower-left block vanishes; upper-left is the pure shift by ς.
  CHECK(Y.bottomLeftCorner(gen.K - split, split).cwiseAbs().maxCoeff() == 0.0);
  const RowVec alpha = gen.cfg.service.alpha;
  Mat y11 = Mat::Zero(split, split);
  for (int l = 0; l + 1 <= gen.g() - 2; ++l)
    y11.block(idx.offset(l), idx.offset(l + 1), idx.size(l), idx.size(l + 1)) =
        kron(Mat::Identity(idx.size(l), idx.size(l)), Mat(alpha));
  CHECK((Y.topLeftCorner(split, split) - y11).cwiseAbs().maxCoeff() <= 1e-15);
  const Mat y22 = Y22(gen, 1.0);
  CHECK(y22.rows() == gen.K - split);
  CHECK((y22.rowwise().sum() - Vec::Ones(y22.rows())).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("block dump") {
  const auto gen = build_generator(fixtures::cellular(3, 2, 1, 1, 1));
  std::ostringstream os;
  dump_block_csv(os, gen.Gamma0, gen.index, 1, 0);
  const std::string s = os.str();
  CHECK(s.rfind("row,col,value\n", 0) == 0);
  // I_8 ⊗ S0: one entry per row, equal to the exit rate of the row's phase.
  int lines = 0;
  for (char ch : s) lines += ch == '\n';
  CHECK(lines == 1 + 16);
}
