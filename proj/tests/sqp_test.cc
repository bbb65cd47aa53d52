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

#include "limitplan/sqp.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "Eigen/Dense"
#include "gtest/gtest.h"
#include "limitplan/planner.h"
#include "limitplan/track.h"
#include "oracles.h"
#include "test_util.h"

namespace limitplan {
namespace {

using oracle::StraightWindow;
using test_util::ShippedEnvelope;

EnvelopeFit HugeEnvelope() {
  EnvelopeFit env;
  env.alpha = 1e3;
  env.beta = 1e3;
  env.b = Eigen::Vector2d(1e5, 1e5);
  env.ax_min_poly = {-1e3, 0.0, 0.0};
  env.ax_max_poly = {1e3, 0.0};
  env.gamma = 0.0;
  return env;
}

// With gamma = 0 and w_x = 0 on a straight along X the heading never
// changes, every residual is linear in u and one Gauss-Newton step from
// zero is the least-squares solution.
TEST(SqpTest, OneIterationMatchesLinearLeastSquares) {
  const EnvelopeFit env = HugeEnvelope();
  MpcConfig config;
  config.w_x = 0.0;
  const PlannerState xi0{0, 0.8, 0, 10, 0.1, 0, 0};
  MpcProblem p = BuildProblem(PlannerModel::kProposed, xi0,
                              StraightWindow(0, 10, env), env, {}, config);
  p.v_max = 12.0;
  const int k_steps = p.num_steps(), n = p.num_controls();
  const double h = config.h;

  // Rows: sqrt(w_v) (v_x,k - v_max) and sqrt(w_y) y_k for k = 1..K.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * k_steps, n);
  Eigen::VectorXd b(2 * k_steps);
  const double sv = std::sqrt(config.w_v), sy = std::sqrt(config.w_y);
  for (int k = 1; k <= k_steps; ++k) {
    for (int j = 0; j < k; ++j) a(2 * (k - 1), 2 * j) = sv * h;
    b(2 * (k - 1)) = -sv * (xi0.vx - p.v_max);
    // y_k = y_0 + h sum_{i<k} v_y,i, v_y,i = v_y,0 + h sum_{j<i} u_y,j.
    for (int i = 1; i < k; ++i) {
      for (int j = 0; j < i; ++j) a(2 * (k - 1) + 1, 2 * j + 1) += sy * h * h;
    }
    b(2 * (k - 1) + 1) = -sy * (xi0.y + k * h * xi0.vy);
  }
  const Eigen::VectorXd expected = a.completeOrthogonalDecomposition().solve(b);

  // Pure Gauss-Newton: no Levenberg shift.
  SqpOptions options;
  options.lambda_initial = options.lambda_min = 0.0;
  SqpSolver solver(options);
  const MpcSolution sol = solver.Solve(p, Eigen::VectorXd::Zero(n), 1);
  EXPECT_LE((sol.StackedControls() - expected).lpNorm<Eigen::Infinity>(), 1e-6);
  EXPECT_NEAR(sol.objective, (a * expected - b).squaredNorm(), 1e-6);
}

MpcProblem ReferenceProblem(const RefPath& path, double s0, double v,
                            double lateral, PlannerModel model,
                            const EnvelopeFit& env) {
  const PathPoint pp = path.At(s0);
  const double nx = -std::sin(pp.heading), ny = std::cos(pp.heading);
  const SpeedCap cap{v, env.AxMax(v), 3.0, 1.0};
  const PathWindow w = *FitAdaptiveWindow(path, s0, cap);
  const PlannerState xi0{pp.x + lateral * nx,
                         pp.y + lateral * ny,
                         pp.heading + 0.03,
                         v,
                         0.1,
                         0.02,
                         s0};
  const std::vector<ObstacleParabola> obs = {
      PlaceObstacle(path, Obstacle{s0 + 20, 0.3, 1.0, 0}, 0.9).parabola};
  return BuildProblem(model, xi0, w, env, obs, MpcConfig{});
}

// With the carried Levenberg weight a repeat solve of the same problem
// from its solution stops at once; a fresh solver cannot lower the
// objective beyond rounding.
TEST(SqpTest, RepeatSolveFromSolutionMakesNoProgress) {
  const EnvelopeFit env = ShippedEnvelope();
  const RefPath path = BuildReferenceTrack();
  for (double s0 : {30.0, 140.0, 250.0}) {
    const MpcProblem p =
        ReferenceProblem(path, s0, 12.0, 0.4, PlannerModel::kProposed, env);
    SqpSolver solver;
    const MpcSolution sol = solver.Solve(p, ColdStart(p), 100);
    ASSERT_EQ(sol.stats.termination, SolveStats::Termination::kConverged) << s0;
    const MpcSolution repeat = solver.Solve(p, WarmStart(sol, 0.0, p), 5);
    EXPECT_EQ(repeat.stats.termination, SolveStats::Termination::kConverged);
    EXPECT_EQ(repeat.stats.sqp_iterations, 1);
    EXPECT_LE((repeat.StackedControls() - sol.StackedControls())
                  .lpNorm<Eigen::Infinity>(),
              1e-8);
    const MpcSolution fresh = SqpSolver().Solve(p, sol.StackedControls(), 20);
    EXPECT_GE(fresh.objective, sol.objective - 1e-9 * (1.0 + sol.objective));
  }
}

TEST(SqpTest, TwoStepObstacleToyMatchesGrid) {
  const EnvelopeFit env = ShippedEnvelope();
  const MpcProblem p = oracle::TwoStepObstacleToy(env);
  const oracle::GridResult grid = oracle::GridSearchTwoStep(p, 0.05);
  // The toy is built so the optimum is interior and the obstacle matters.
  ASSERT_GT(grid.u(1), 0.1);
  ASSERT_LT(grid.u(1), 0.5 * env.beta);
  SqpSolver solver;
  const MpcSolution sol = solver.Solve(p, ColdStart(p), 50);
  EXPECT_NEAR(sol.objective, grid.objective, 1e-3);
  EXPECT_NEAR(sol.objective, oracle::EulerCost(p, sol.StackedControls()), 1e-9);
}

TEST(SqpTest, GradientCheckOnRandomIterates) {
  const EnvelopeFit env = ShippedEnvelope();
  const RefPath path = BuildReferenceTrack();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> s_dist(0.0, path.length() - 80.0);
  std::uniform_real_distribution<double> v_dist(2.0, 28.0);
  std::uniform_real_distribution<double> e_dist(-1.0, 1.0);
  std::normal_distribution<double> u_dist(0.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const PlannerModel model =
        trial % 4 == 3 ? PlannerModel::kKinematic : PlannerModel::kProposed;
    const MpcProblem p = ReferenceProblem(path, s_dist(rng), v_dist(rng),
                                          e_dist(rng), model, env);
    Eigen::VectorXd u(p.num_controls());
    for (int k = 0; k < p.num_steps(); ++k) {
      Eigen::Vector2d c(u_dist(rng), u_dist(rng));
      if (model == PlannerModel::kKinematic) c(1) *= 0.05;
      u.segment<2>(2 * k) = ProjectControl(p, c);
    }
    const GradientCheckReport r = GradientCheck(p, u);
    EXPECT_LE(r.max(), 1e-4)
        << trial << " dyn " << r.dynamics << " sens " << r.sensitivity
        << " cost " << r.cost << " obs " << r.obstacle << " ell " << r.ellipse;
    EXPECT_LE(r.linear, 1e-10) << trial;
  }
}

TEST(SqpTest, GradientCheckBicycleStraightSteering) {
  const EnvelopeFit env = ShippedEnvelope();
  const RefPath path = BuildReferenceTrack();
  const MpcProblem p =
      ReferenceProblem(path, 20.0, 10.0, 0.0, PlannerModel::kKinematic, env);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(p.num_controls());
  for (int k = 0; k < p.num_steps(); ++k) u(2 * k) = 0.5;
  EXPECT_LE(GradientCheck(p, u).max(), 1e-6);
}

// The same maneuver on a rigidly moved copy of the track gives the same
// body-frame controls.
TEST(SqpTest, InvariantUnderRigidMotion) {
  const EnvelopeFit env = ShippedEnvelope();
  const auto segs = ReferenceTrackSegments();
  const RefPath base = *BuildTrack(segs);
  const RefPath moved = *BuildTrack(segs, 250.0, -80.0, 2.1);
  for (PlannerModel model :
       {PlannerModel::kProposed, PlannerModel::kKinematic}) {
    const MpcProblem a = ReferenceProblem(base, 75.0, 14.0, 0.5, model, env);
    const MpcProblem b = ReferenceProblem(moved, 75.0, 14.0, 0.5, model, env);
    const MpcSolution sa = SqpSolver().Solve(a, ColdStart(a), 5);
    const MpcSolution sb = SqpSolver().Solve(b, ColdStart(b), 5);
    EXPECT_LE(
        (sa.StackedControls() - sb.StackedControls()).lpNorm<Eigen::Infinity>(),
        1e-6)
        << PlannerModelName(model);
    EXPECT_NEAR(sa.objective, sb.objective, 1e-6 * (1.0 + sa.objective));
  }
}

TEST(SqpTest, SolveFitsTheReplanBudget) {
  const EnvelopeFit env = ShippedEnvelope();
  const RefPath path = BuildReferenceTrack();
  for (PlannerModel model :
       {PlannerModel::kProposed, PlannerModel::kKinematic}) {
    const MpcProblem p = ReferenceProblem(path, 130.0, 20.0, 0.5, model, env);
    const MpcSolution sol =
        SqpSolver().Solve(p, ColdStart(p), p.config.max_iterations(model));
    EXPECT_LE(sol.stats.wall_ms, 100.0);
    EXPECT_LE(sol.stats.sqp_iterations, p.config.max_iterations(model));
  }
}

TEST(SqpTest, LevenbergWeightCarriesAcrossSolves) {
  const EnvelopeFit env = ShippedEnvelope();
  const RefPath path = BuildReferenceTrack();
  const MpcProblem p =
      ReferenceProblem(path, 60.0, 18.0, 0.8, PlannerModel::kProposed, env);
  SqpOptions options;
  SqpSolver carried(options);
  carried.Solve(p, ColdStart(p), 5);
  EXPECT_GE(carried.lambda(), options.lambda_min);
  EXPECT_LE(carried.lambda(), options.lambda_max);
  carried.Reset();
  EXPECT_EQ(carried.lambda(), options.lambda_initial);
}

}  // namespace
}  // namespace limitplan
