// Copyright 2026 The limitplan Authors
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

#include "limitplan/qp.h"

#include <cmath>
#include <random>

#include "Eigen/Dense"
#include "gtest/gtest.h"
#include "oracles.h"

namespace limitplan {
namespace {

using oracle::EnumerateActiveSets;
using oracle::QpOracleResult;
using oracle::RandomQp;

TEST(QpTest, ScalarLowerBound) {
  QpSubproblem qp = QpSubproblem::WithSize(1);
  qp.h = Eigen::MatrixXd::Constant(1, 1, 2.0);
  qp.g = Eigen::VectorXd::Zero(1);
  qp.a_in = Eigen::MatrixXd::Constant(1, 1, -1.0);
  qp.b_in = Eigen::VectorXd::Constant(1, -1.0);
  const QpSolution sol = SolveQp(qp);
  ASSERT_EQ(sol.status, QpStatus::kOptimal);
  EXPECT_NEAR(sol.x(0), 1.0, 1e-12);
  EXPECT_NEAR(sol.y_in(0), 2.0, 1e-12);
}

TEST(QpTest, RandomStrictlyConvexMatchesEnumeration) {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 8;
    const int me = std::min(trial % 3, n - 1);
    const int mi = trial % 9;
    const QpSubproblem qp = RandomQp(rng, n, me, mi, n);
    const QpOracleResult oracle = EnumerateActiveSets(qp);
    ASSERT_TRUE(oracle.found) << trial;
    const QpSolution sol = SolveQp(qp);
    ASSERT_EQ(sol.status, QpStatus::kOptimal) << trial;
    EXPECT_LE((sol.x - oracle.x).lpNorm<Eigen::Infinity>(), 1e-6) << trial;
    const QpResiduals r = ComputeResiduals(qp, sol);
    EXPECT_LE(r.primal, 1e-8) << trial;
    EXPECT_LE(r.dual, 1e-6) << trial;
    EXPECT_LE(r.complementarity, 1e-6) << trial;
    EXPECT_LE(r.dual_sign, 1e-6) << trial;
    ++checked;
  }
  EXPECT_EQ(checked, 300);
}

// Rank-deficient H: the minimizer need not be unique, the optimal value is.
TEST(QpTest, RandomSemidefiniteMatchesEnumerationObjective) {
  std::mt19937_64 rng(5);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;
    const int mi = 2 * n;
    QpSubproblem qp = RandomQp(rng, n, 0, mi, n - 1);
    // Bound the box so the problem stays bounded.
    QpSubproblem boxed = qp;
    boxed.a_in.resize(mi + 2 * n, n);
    boxed.b_in.resize(mi + 2 * n);
    boxed.a_in.topRows(mi) = qp.a_in;
    boxed.b_in.head(mi) = qp.b_in;
    boxed.a_in.middleRows(mi, n) = Eigen::MatrixXd::Identity(n, n);
    boxed.a_in.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
    boxed.b_in.tail(2 * n).setConstant(1e3);
    if (n > 5) continue;  // keeps the 2^(3n) enumeration small
    const QpOracleResult oracle = EnumerateActiveSets(boxed);
    if (!oracle.found) continue;
    const QpSolution sol = SolveQp(boxed);
    ASSERT_EQ(sol.status, QpStatus::kOptimal) << trial;
    EXPECT_NEAR(sol.objective, oracle.objective,
                1e-6 * std::max(1.0, std::abs(oracle.objective)))
        << trial;
    EXPECT_LE(ComputeResiduals(boxed, sol).primal, 1e-8);
    ++compared;
  }
  EXPECT_GT(compared, 50);
}

TEST(QpTest, EqualityOnlyMatchesKktSolve) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 7;
    const int me = 1 + trial % (n - 1);
    const QpSubproblem qp = RandomQp(rng, n, me, 0, n);
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + me, n + me);
    kkt.topLeftCorner(n, n) = qp.h;
    kkt.topRightCorner(n, me) = qp.a_eq.transpose();
    kkt.bottomLeftCorner(me, n) = qp.a_eq;
    Eigen::VectorXd rhs(n + me);
    rhs << -qp.g, qp.b_eq;
    const Eigen::VectorXd z = kkt.fullPivLu().solve(rhs);
    const QpSolution sol = SolveQp(qp);
    ASSERT_EQ(sol.status, QpStatus::kOptimal);
    EXPECT_LE((sol.x - z.head(n)).lpNorm<Eigen::Infinity>(), 1e-9) << trial;
  }
}

TEST(QpTest, ReportsInfeasible) {
  QpSubproblem qp = QpSubproblem::WithSize(1);
  qp.h = Eigen::MatrixXd::Identity(1, 1);
  qp.g = Eigen::VectorXd::Zero(1);
  qp.a_in.resize(2, 1);
  qp.a_in << 1.0, -1.0;
  qp.b_in.resize(2);
  qp.b_in << -1.0, -1.0;  // x <= -1 and x >= 1
  EXPECT_EQ(SolveQp(qp).status, QpStatus::kInfeasible);
}

// Unconstrained minimizer near 3.6e5; the constrained one near -8e-3.
TEST(QpTest, FlatHessianFarFromFeasibleSet) {
  QpSubproblem qp = QpSubproblem::WithSize(1);
  qp.h(0, 0) = 4.958826163e-06;
  qp.g(0) = -1.778118921;
  qp.a_in.resize(3, 1);
  qp.a_in << 0.6263791015, -0.259322703, 0.3732321067;
  qp.b_in.resize(3);
  qp.b_in << -0.005035901533, 0.002084877344, -0.003000675045;
  const QpOracleResult ref = EnumerateActiveSets(qp);
  ASSERT_TRUE(ref.found);
  const QpSolution sol = SolveQp(qp);
  ASSERT_EQ(sol.status, QpStatus::kOptimal);
  EXPECT_NEAR(sol.x(0), ref.x(0), 1e-9);
}

TEST(QpTest, RejectsMismatchedSizes) {
  QpSubproblem qp = QpSubproblem::WithSize(2);
  qp.h = Eigen::MatrixXd::Identity(3, 3);
  qp.g = Eigen::VectorXd::Zero(2);
  EXPECT_EQ(SolveQp(qp).status, QpStatus::kBadInput);
}

}  // namespace
}  // namespace limitplan
