// Copyright 2026 The mixform Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mixform/traffic_model.h"

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "mixform/errors.h"

namespace mixform {
namespace {

HdvParams Ovm(double alpha, double beta) {
  HdvParams p;
  p.alpha = alpha;
  p.beta = beta;
  return p;
}

TEST(DesiredVelocity, RampEndpointsAndMidpoint) {
  const HdvParams p = Ovm(0.6, 0.9);
  EXPECT_EQ(desired_velocity(5.0, p), 0.0);
  EXPECT_EQ(desired_velocity(35.0, p), 30.0);
  EXPECT_NEAR(desired_velocity(20.0, p), 15.0, 1e-12);
  EXPECT_EQ(desired_velocity(0.0, p), 0.0);
  EXPECT_EQ(desired_velocity(100.0, p), 30.0);
}

TEST(DesiredVelocity, SlopeValues) {
  const HdvParams p = Ovm(0.6, 0.9);
  EXPECT_NEAR(desired_velocity_slope(20.0, p), std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(desired_velocity_slope(10.0, p), std::numbers::pi / 4, 1e-12);
  EXPECT_EQ(desired_velocity_slope(40.0, p), 0.0);
  EXPECT_EQ(desired_velocity_slope(5.0, p), 0.0);
}

TEST(DesiredVelocity, MonotoneAndSlopeMatchesFiniteDifference) {
  const HdvParams p = Ovm(0.6, 0.9);
  double prev = -1.0;
  for (double s = 0.0; s <= 40.0; s += 0.05) {
    const double v = desired_velocity(s, p);
    EXPECT_GE(v, prev);
    EXPECT_GE(desired_velocity_slope(s, p), 0.0);
    prev = v;
  }
  for (double s = 5.5; s < 35.0; s += 0.5) {
    const double h = 1e-5;
    const double fd =
        (desired_velocity(s + h, p) - desired_velocity(s - h, p)) / (2 * h);
    EXPECT_NEAR(desired_velocity_slope(s, p), fd, 1e-7);
  }
}

TEST(Linearize, ReferenceSettings) {
  const auto a = linearize(Ovm(0.6, 0.9), 20.0);
  EXPECT_NEAR(a.alpha1, 0.942478, 1e-6);
  EXPECT_DOUBLE_EQ(a.alpha2, 1.5);
  EXPECT_DOUBLE_EQ(a.alpha3, 0.9);

  const auto b = linearize(Ovm(1.4, 1.8), 10.0);
  EXPECT_NEAR(b.alpha1, 1.099557, 1e-6);
  EXPECT_DOUBLE_EQ(b.alpha2, 3.2);
  EXPECT_DOUBLE_EQ(b.alpha3, 1.8);
}

TEST(Linearize, RejectsZeroSlopeEquilibrium) {
  EXPECT_THROW(linearize(Ovm(0.6, 0.9), 5.0), DegenerateEquilibrium);
  EXPECT_THROW(linearize(Ovm(0.6, 0.9), 35.0), DegenerateEquilibrium);
  EXPECT_THROW(linearize(Ovm(0.6, 0.9), 50.0), DegenerateEquilibrium);
  EXPECT_THROW(linearize(Ovm(-1.0, 0.9), 20.0), InvalidInput);
}

// Central differences of F(s, s_dot, v) at (s*, 0, v*).
TEST(Linearize, MatchesFiniteDifferencesOfNonlinearModel) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> gain(0.1, 1.5);
  std::uniform_real_distribution<double> spacing(6.0, 34.0);
  for (int trial = 0; trial < 50; ++trial) {
    const HdvParams p = Ovm(gain(rng), gain(rng));
    const double s = spacing(rng);
    const double v = desired_velocity(s, p);
    const double h = 1e-5;
    const double dFds = (ovm_acceleration(p, s + h, 0, v) -
                         ovm_acceleration(p, s - h, 0, v)) / (2 * h);
    const double dFdsdot = (ovm_acceleration(p, s, h, v) -
                            ovm_acceleration(p, s, -h, v)) / (2 * h);
    const double dFdv = (ovm_acceleration(p, s, 0, v + h) -
                         ovm_acceleration(p, s, 0, v - h)) / (2 * h);
    const auto c = linearize(p, s);
    EXPECT_NEAR(c.alpha1, dFds, 1e-6 * std::abs(c.alpha1));
    EXPECT_NEAR(c.alpha2, dFdsdot - dFdv, 1e-6 * c.alpha2);
    EXPECT_NEAR(c.alpha3, dFdsdot, 1e-6 * c.alpha3);
    EXPECT_NEAR(ovm_acceleration(p, s, 0, v), 0.0, 1e-12);
  }
}

TEST(StringStability, IndexValues) {
  EXPECT_NEAR(string_stability_index(Ovm(0.6, 0.9), 20.0), 0.829204, 1e-6);
  EXPECT_NEAR(string_stability_index(Ovm(1.4, 1.8), 10.0), 4.214602, 1e-6);
  HdvParams zero = Ovm(0.0, 0.0);
  EXPECT_EQ(string_stability_index(zero, 5.0), 0.0);
  EXPECT_TRUE(is_string_stable(zero, 5.0));
  EXPECT_FALSE(is_string_stable(Ovm(0.3, 0.3), 20.0));
}

TEST(FormationType, ValidatesAndSorts) {
  const Formation f(12, {10, 1, 7, 4});
  EXPECT_EQ(f.to_string(), "1-4-7-10");
  EXPECT_TRUE(f.contains(7));
  EXPECT_FALSE(f.contains(8));
  EXPECT_THROW(Formation(12, {}), InvalidInput);
  EXPECT_THROW(Formation(12, {1, 1}), InvalidInput);
  EXPECT_THROW(Formation(12, {0}), InvalidInput);
  EXPECT_THROW(Formation(12, {13}), InvalidInput);
  EXPECT_EQ(Formation::parse(12, "2-5-8-11"), Formation(12, {2, 5, 8, 11}));
  EXPECT_THROW(Formation::parse(12, "2-x"), InvalidInput);
  EXPECT_THROW(Formation::parse(12, "2-"), InvalidInput);
  EXPECT_EQ(Formation(12, {12}).rotated(1), Formation(12, {1}));
  EXPECT_EQ(Formation(12, {1}).rotated(-1), Formation(12, {12}));
}

TEST(StateSpace, RowStructureSmallExample) {
  const auto ss = build_state_space({1.0, 2.0, 1.0}, Formation(3, {1}));
  ASSERT_EQ(ss.A.rows(), 6);
  // Vehicle 1 is autonomous: no human feedback in its velocity row.
  EXPECT_TRUE(ss.A.row(3).isZero(0.0));
  // Vehicle 2: alpha1 on s~_2, alpha3 on v~_1, -alpha2 on v~_2.
  Eigen::RowVectorXd expected(6);
  expected << 0, 1, 0, 1, -2, 0;
  EXPECT_EQ(ss.A.row(4), expected);
  // Vehicle 3 follows vehicle 2.
  expected << 0, 0, 1, 0, 1, -2;
  EXPECT_EQ(ss.A.row(5), expected);
  // Spacing rows: M1 is circulant with the wrap-around entry in row 1.
  Eigen::MatrixXd m1(3, 3);
  m1 << -1, 0, 1, 1, -1, 0, 0, 1, -1;
  EXPECT_EQ(ss.A.topRightCorner(3, 3), m1);
  EXPECT_TRUE(ss.A.topLeftCorner(3, 3).isZero(0.0));

  ASSERT_EQ(ss.B.cols(), 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(6);
  b(3) = 1.0;
  EXPECT_EQ(ss.B.col(0), b);
  EXPECT_EQ(ss.H.topRows(3), Eigen::MatrixXd::Zero(3, 3));
  EXPECT_EQ(ss.H.bottomRows(3), Eigen::MatrixXd::Identity(3, 3));
}

TEST(StateSpace, AllAutonomousHasNoHumanBlock) {
  std::vector<int> all(7);
  for (int i = 0; i < 7; ++i) all[i] = i + 1;
  const auto ss = build_state_space({0.9, 1.5, 0.9}, Formation(7, all));
  EXPECT_TRUE(ss.A.bottomRows(7).isZero(0.0));
}

TEST(StateSpace, RandomFormationsSatisfyStructuralInvariants) {
  std::mt19937 rng(11);
  const LinearHdvCoeffs c{0.7, 1.9, 0.8};
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 39);
    std::vector<int> members;
    for (int i = 1; i <= n; ++i) {
      if (rng() % 3 == 0) members.push_back(i);
    }
    if (members.empty()) members.push_back(1 + static_cast<int>(rng() % n));
    const Formation f(n, members);
    const auto ss = build_state_space(c, f);

    Eigen::RowVectorXd ones = Eigen::RowVectorXd::Zero(2 * n);
    ones.head(n).setOnes();
    EXPECT_TRUE((ones * ss.A).isZero(0.0));
    EXPECT_TRUE((ones * ss.B).isZero(0.0));
    EXPECT_TRUE((ones * ss.H).isZero(0.0));

    for (int i = 1; i <= n; ++i) {
      const auto row = ss.A.row(n + i - 1);
      if (f.contains(i)) {
        EXPECT_TRUE(row.isZero(0.0));
      } else {
        const int pred = i == 1 ? n : i - 1;
        EXPECT_EQ(row(i - 1), c.alpha1);
        EXPECT_EQ(row(n + i - 1), -c.alpha2);
        EXPECT_EQ(row(n + pred - 1), c.alpha3);
        EXPECT_EQ((row.array() != 0.0).count(), 3);
      }
    }

    const auto rr = reduce(ss, {});
    EXPECT_EQ(rr.m, 2 * n - 1);
    EXPECT_TRUE((rr.E * rr.T).isIdentity(0.0));
    EXPECT_LE((ss.A * rr.T - rr.T * rr.A_r).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Reduce, SmallRingLiftAndCost) {
  const auto ss = build_state_space({1.0, 2.0, 1.0}, Formation(3, {1}));
  PerformanceWeights w{0.01, 0.05, 0.1, CostScaling::kSquared};
  const auto rr = reduce(ss, w);
  EXPECT_EQ(rr.m, 5);
  EXPECT_TRUE((rr.E * rr.T).isIdentity(0.0));
  EXPECT_LE((ss.A * rr.T - rr.T * rr.A_r).cwiseAbs().maxCoeff(), 1e-13);

  // s~_3 = -(s~_1 + s~_2) puts gamma_s^2 (I + 1 1') on the spacing block.
  Eigen::Matrix2d expected;
  expected << 2, 1, 1, 2;
  EXPECT_TRUE(rr.Q_r.topLeftCorner(2, 2).isApprox(1e-4 * expected, 1e-14));
  EXPECT_TRUE(rr.Q_r.bottomRightCorner(3, 3).isApprox(
      0.0025 * Eigen::Matrix3d::Identity(), 1e-14));
  EXPECT_TRUE(rr.Q_r.topRightCorner(2, 3).isZero(0.0));
  EXPECT_DOUBLE_EQ(rr.R(0, 0), 0.01);

  // Default scaling uses the gammas directly.
  const auto lin = reduce(ss, {});
  EXPECT_TRUE(lin.Q_r.topLeftCorner(2, 2).isApprox(1e-2 * expected, 1e-14));
  EXPECT_DOUBLE_EQ(lin.R(0, 0), 0.1);

  // Q_r is positive definite.
  Eigen::LLT<Eigen::MatrixXd> llt(rr.Q_r);
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(Reduce, RejectsNonPositiveWeights) {
  const auto ss = build_state_space({1.0, 2.0, 1.0}, Formation(3, {1}));
  EXPECT_THROW(reduce(ss, {0.0, 0.05, 0.1}), InvalidInput);
  EXPECT_THROW(reduce(ss, {0.01, 0.05, -0.1}), InvalidInput);
}

}  // namespace
}  // namespace mixform
