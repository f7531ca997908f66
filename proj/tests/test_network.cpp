#include <gtest/gtest.h>

#include <random>

#include "dffr/network.hpp"
#include "oracles.hpp"

using namespace dffr;
using namespace dffr::network;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

oracle::Mat to_rows(const Matrix& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(WeightMatrix, IdentityIsDisconnected) {
  EXPECT_EQ(code_of([] { validate_weight_matrix(Matrix::Identity(2, 2)); }), ErrorCode::Disconnected);
}

TEST(WeightMatrix, HalfHalfIsValid) {
  const auto wm = validate_weight_matrix(mat({{0.5, 0.5}, {0.5, 0.5}}), 1);
  EXPECT_EQ(wm.n(), 2);
  EXPECT_DOUBLE_EQ(wm.omega(), 0.5);
  EXPECT_EQ(wm.B(), 1);
}

TEST(WeightMatrix, Paper4HasFloorPoint22) {
  const auto wm = validate_weight_matrix(paper4_matrix(0.22));
  EXPECT_EQ(wm.n(), 4);
  EXPECT_DOUBLE_EQ(wm.omega(), 0.22);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(wm.w().row(i).sum(), 1.0, 1e-12);
    EXPECT_NEAR(wm.w().col(i).sum(), 1.0, 1e-12);
  }
}

TEST(WeightMatrix, RejectsRowSumDefect) {
  EXPECT_EQ(code_of([] { validate_weight_matrix(mat({{0.6, 0.5}, {0.5, 0.5}})); }), ErrorCode::NotDoublyStochastic);
}

TEST(WeightMatrix, AcceptsRoundingNoiseBelowTolerance) {
  EXPECT_NO_THROW(validate_weight_matrix(mat({{0.5 + 1e-11, 0.5 - 1e-11}, {0.5 - 1e-11, 0.5 + 1e-11}})));
}

TEST(WeightMatrix, RejectsAsymmetric) {
  // Doubly stochastic but not symmetric: a directed 3-cycle mixed with self-loops.
  const Matrix w = mat({{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}});
  EXPECT_EQ(code_of([&] { validate_weight_matrix(w); }), ErrorCode::NotSymmetric);
}

TEST(WeightMatrix, RejectsTwoComponents) {
  const Matrix w = mat({{0.5, 0.5, 0, 0}, {0.5, 0.5, 0, 0}, {0, 0, 0.5, 0.5}, {0, 0, 0.5, 0.5}});
  EXPECT_EQ(code_of([&] { validate_weight_matrix(w); }), ErrorCode::Disconnected);
}

TEST(WeightMatrix, RejectsSubnormalWeight) {
  const double tiny = 1e-320;
  const Matrix w = mat({{1.0 - tiny, tiny}, {tiny, 1.0 - tiny}});
  EXPECT_EQ(code_of([&] { validate_weight_matrix(w); }), ErrorCode::NonPositiveWeightFloor);
}

TEST(WeightMatrix, RejectsNonFiniteAndNonSquare) {
  EXPECT_THROW(validate_weight_matrix(mat({{NAN, 1.0}, {1.0, 0.0}})), Error);
  EXPECT_THROW(validate_weight_matrix(Matrix::Constant(2, 3, 1.0 / 3.0)), Error);
  EXPECT_THROW(validate_weight_matrix(mat({{0.5, 0.5}, {0.5, 0.5}}), 0), Error);
}

TEST(WeightMatrix, SingleAgentIsTriviallyConnected) {
  const auto wm = validate_weight_matrix(Matrix::Ones(1, 1));
  EXPECT_DOUBLE_EQ(wm.omega(), 1.0);
}

TEST(MixingConstants, Paper4FormulaValues) {
  const auto mc = mixing_constants(validate_weight_matrix(paper4_matrix()));
  EXPECT_NEAR(mc.lambda, 0.9965625, 1e-12);
  EXPECT_NEAR(mc.gamma, 1.0069106123953646, 1e-12);
}

TEST(MixingConstants, BoundaryInputs) {
  const auto mc = mixing_constants(1, 1.0, 1);
  EXPECT_NEAR(mc.lambda, 0.75, 1e-12);
  EXPECT_NEAR(mc.gamma, 16.0 / 9.0, 1e-12);
}

TEST(MixingConstants, WindowTwo) {
  const auto mc = mixing_constants(validate_weight_matrix(mat({{0.5, 0.5}, {0.5, 0.5}}), 2));
  EXPECT_NEAR(mc.lambda, 0.9842509842514764, 1e-12);
  EXPECT_GT(mc.gamma, 1.0);
}

TEST(MixingPowerBound, RankOneMatrixPasses) {
  const auto wm = validate_weight_matrix(mat({{0.5, 0.5}, {0.5, 0.5}}));
  const auto rep = mixing_power_bound_check(wm, mixing_constants(wm), 5);
  EXPECT_TRUE(rep.pass);
  EXPECT_GE(rep.min_slack, 0.0);
}

TEST(MixingPowerBound, Paper4Horizon200AgainstNaivePowers) {
  const auto wm = validate_weight_matrix(paper4_matrix());
  const auto mc = mixing_constants(wm);
  const auto rep = mixing_power_bound_check(wm, mc, 200);
  EXPECT_TRUE(rep.pass);

  // Independent route: explicit matrix powers.
  auto P = oracle::identity(4);
  const auto W = to_rows(wm.w());
  for (int k = 0; k <= 200; ++k) {
    for (const auto& row : P)
      for (double v : row) ASSERT_LE(std::abs(v - 0.25), mc.gamma * std::pow(mc.lambda, k) + 1e-12) << "k=" << k;
    P = oracle::matmul(P, W);
  }
}

TEST(MixingPowerBound, PowersStayDoublyStochastic) {
  const auto W = to_rows(ring_matrix(6, 0.3));
  auto P = oracle::identity(6);
  for (int k = 1; k <= 100; ++k) {
    P = oracle::matmul(P, W);
    for (std::size_t i = 0; i < 6; ++i) {
      double r = 0.0, c = 0.0;
      for (std::size_t j = 0; j < 6; ++j) {
        r += P[i][j];
        c += P[j][i];
      }
      ASSERT_NEAR(r, 1.0, 1e-9);
      ASSERT_NEAR(c, 1.0, 1e-9);
    }
  }
}

TEST(MixingPowerBound, HoldsAcrossGeneratedCorpus) {
  std::vector<Matrix> corpus{paper4_matrix(0.1), paper4_matrix(1.0 / 3.0), ring_matrix(5, 0.2), ring_matrix(8, 0.45),
                             complete_matrix(3, 0.2), complete_matrix(6, 1.0 / 6.0), ring_matrix(2, 0.25)};
  for (const auto& w : corpus) {
    const auto wm = validate_weight_matrix(w);
    EXPECT_TRUE(mixing_power_bound_check(wm, mixing_constants(wm), 200).pass) << w;
  }
}

TEST(Gossip, HalfHalfAverages) {
  const auto out = gossip_average(validate_weight_matrix(mat({{0.5, 0.5}, {0.5, 0.5}})),
                                  AgentVectors{Vector::Constant(1, 2.0), Vector::Constant(1, 4.0)});
  EXPECT_DOUBLE_EQ(out[0][0], 3.0);
  EXPECT_DOUBLE_EQ(out[1][0], 3.0);
}

TEST(Gossip, IdentityLeavesStatesUnchanged) {
  const AgentVectors x{Vector::Constant(2, 1.5), Vector::Constant(2, -7.0)};
  const auto out = gossip_average(Matrix::Identity(2, 2), x);
  EXPECT_EQ(out[0], x[0]);
  EXPECT_EQ(out[1], x[1]);
}

TEST(Gossip, Paper4MatchesMatrixVectorProduct) {
  const Matrix w = paper4_matrix();
  const auto out = gossip_average(validate_weight_matrix(w), AgentVectors{Vector::Constant(1, 1.0), Vector::Constant(1, 2.0),
                                                                          Vector::Constant(1, 3.0), Vector::Constant(1, 4.0)});
  const auto rows = to_rows(w);
  const double x[4] = {1, 2, 3, 4};
  for (std::size_t i = 0; i < 4; ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < 4; ++j) e += rows[i][j] * x[j];
    EXPECT_NEAR(out[i][0], e, 1e-15);
  }
}

TEST(Gossip, DimensionMismatch) {
  const auto wm = validate_weight_matrix(mat({{0.5, 0.5}, {0.5, 0.5}}));
  EXPECT_THROW(gossip_average(wm, AgentVectors{Vector::Zero(1)}), Error);
  EXPECT_THROW(gossip_average(wm, AgentVectors{Vector::Zero(1), Vector::Zero(2)}), Error);
}

TEST(Gossip, PreservesMeanAndShrinksDiameter) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0.0, 3.0);
  const auto wm = validate_weight_matrix(ring_matrix(7, 0.3));
  for (int rep = 0; rep < 200; ++rep) {
    AgentVectors x;
    for (int i = 0; i < 7; ++i) x.push_back(Vector::NullaryExpr(3, [&] { return N(rng); }));
    const auto z = gossip_average(wm, x);
    Vector mx = Vector::Zero(3), mz = Vector::Zero(3);
    for (int i = 0; i < 7; ++i) {
      mx += x[static_cast<std::size_t>(i)];
      mz += z[static_cast<std::size_t>(i)];
    }
    mx /= 7.0;
    mz /= 7.0;
    ASSERT_LE((mx - mz).norm(), 1e-12);
    double dx = 0.0, dz = 0.0;
    for (int i = 0; i < 7; ++i) {
      dx = std::max(dx, (x[static_cast<std::size_t>(i)] - mx).norm());
      dz = std::max(dz, (z[static_cast<std::size_t>(i)] - mz).norm());
    }
    ASSERT_LE(dz, dx + 1e-12);
  }
}

TEST(Generators, RejectOutOfRangeParameters) {
  EXPECT_THROW(paper4_matrix(0.0), Error);
  EXPECT_THROW(paper4_matrix(0.4), Error);
}
