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

#include <random>
#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "limitplan/dynamics.h"
#include "limitplan/envelope.h"
#include "limitplan/planner.h"
#include "limitplan/qp.h"
#include "limitplan/sqp.h"
#include "limitplan/track.h"

namespace limitplan {
namespace {

std::string ConfigPath(const std::string& name) {
  return std::string(LIMITPLAN_CONFIG_DIR) + "/" + name;
}

void BM_PlantStep(benchmark::State& state) {
  const VehicleParams p = *VehicleParams::ReadFile(ConfigPath("vehicle.cfg"));
  VehicleState s = TrimmedState(p, 20.0, 0.0, 0.0);
  ControlInput in;
  in.torque = {100, 100, 100, 100};
  in.delta_cmd = 0.05;
  for (auto _ : state) {
    s = *Step(s, in, p, 1e-3);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_PlantStep);

void BM_DenseQp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  QpSubproblem qp = QpSubproblem::WithSize(n);
  Eigen::MatrixXd f(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f(i, j) = normal(rng);
  qp.h = f.transpose() * f + Eigen::MatrixXd::Identity(n, n);
  qp.g = Eigen::VectorXd::NullaryExpr(n, [&] { return normal(rng); });
  qp.a_in.resize(2 * n, n);
  qp.a_in << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  qp.b_in = Eigen::VectorXd::Constant(2 * n, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(SolveQp(qp));
}
BENCHMARK(BM_DenseQp)->Arg(8)->Arg(30)->Arg(75);

void BM_SqpSolve(benchmark::State& state) {
  const auto model = static_cast<PlannerModel>(state.range(0));
  const EnvelopeFit env = *EnvelopeFit::ReadFile(ConfigPath("envelope.cfg"));
  const RefPath path = BuildReferenceTrack();
  const double s0 = 120.0, v = 15.0;
  const PathPoint pp = path.At(s0);
  const SpeedCap cap{v, env.AxMax(v), 3.0, 1.0};
  const PathWindow w = *FitAdaptiveWindow(path, s0, cap);
  const std::vector<ObstacleParabola> obs = {
      PlaceObstacle(path, Obstacle{s0 + 20, 0.3, 1.0, 0}, 0.9).parabola};
  const PlannerState xi0{pp.x, pp.y, pp.heading, v, 0.0, 0.0, s0};
  const MpcProblem p = BuildProblem(model, xi0, w, env, obs, MpcConfig{});
  const int iterations = p.config.max_iterations(model);
  for (auto _ : state) {
    SqpSolver solver;
    benchmark::DoNotOptimize(solver.Solve(p, ColdStart(p), iterations));
  }
  state.SetLabel(PlannerModelName(model));
}
BENCHMARK(BM_SqpSolve)
    ->Arg(static_cast<int>(PlannerModel::kProposed))
    ->Arg(static_cast<int>(PlannerModel::kKinematic))
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace limitplan

BENCHMARK_MAIN();
