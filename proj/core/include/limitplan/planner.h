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

// Planning models and the discretized optimal-control problem.
//
// Two models share one transcription. The proposed model is a point mass
// with yaw whose accelerations are restricted to the identified envelope:
// state [X, Y, psi, v_x, v_y, v_psi, s], decision controls [u_x, u_y] with
// u_psi = gamma u_y substituted. The baseline is a kinematic bicycle: state
// [X, Y, psi, v, s], controls [a, delta].

#ifndef LIMITPLAN_PLANNER_H_
#define LIMITPLAN_PLANNER_H_

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "limitplan/config.h"
#include "limitplan/envelope.h"
#include "limitplan/track.h"

namespace limitplan {

enum class PlannerModel { kProposed, kKinematic };

const char* PlannerModelName(PlannerModel model);
absl::StatusOr<PlannerModel> ParsePlannerModel(const std::string& name);

// Keeps ds/dt differentiable at rest.
inline constexpr double kArcRateEpsilon = 1e-3;  // m/s

inline constexpr int kProposedStates = 7;
inline constexpr int kKinematicStates = 5;
inline constexpr int kPlanControls = 2;

struct PlannerState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double vx = 0.0;  // bicycle: speed v
  double vy = 0.0;
  double vpsi = 0.0;
  double s = 0.0;
};

// d/dt of [X, Y, psi, v_x, v_y, v_psi, s] under u = [u_x, u_y, u_psi].
template <typename T>
std::array<T, 7> F2di(const std::array<T, 7>& xi, const std::array<T, 3>& u) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T c = cos(xi[2]);
  const T s = sin(xi[2]);
  return {xi[3] * c - xi[4] * s,
          xi[3] * s + xi[4] * c,
          xi[5],
          u[0],
          u[1],
          u[2],
          sqrt(xi[3] * xi[3] + xi[4] * xi[4] +
               T(kArcRateEpsilon * kArcRateEpsilon))};
}

struct BicycleGeometry {
  double lf = 1.3;
  double lr = 1.3;
  double delta_max = 0.5;
};

// d/dt of [X, Y, psi, v, s] under [a, delta].
template <typename T>
std::array<T, 5> FBicycle(const std::array<T, 5>& xi, const std::array<T, 2>& u,
                          const BicycleGeometry& geometry) {
  using std::atan;
  using std::cos;
  using std::sin;
  using std::sqrt;
  using std::tan;
  const T beta = T(geometry.lr / (geometry.lr + geometry.lf)) * tan(u[1]);
  const T slip = atan(beta);
  return {xi[3] * cos(xi[2] + slip), xi[3] * sin(xi[2] + slip),
          xi[3] / T(geometry.lr) * sin(slip), u[0],
          sqrt(xi[3] * xi[3] + T(kArcRateEpsilon * kArcRateEpsilon))};
}

struct MpcConfig {
  double h = 0.2;  // s
  int horizon_steps = 15;
  double w_v = 1.0;
  double w_x = 10.0;
  double w_y = 10.0;
  double w_o = 100.0;
  int max_iterations_proposed = 5;
  int max_iterations_kinematic = 6;
  double replan_period = 0.1;  // s

  double horizon() const { return h * horizon_steps; }
  int max_iterations(PlannerModel model) const {
    return model == PlannerModel::kProposed ? max_iterations_proposed
                                            : max_iterations_kinematic;
  }
  absl::Status Validate() const;
  // Reads `mpc.*` keys, keeping defaults for absent ones.
  static absl::StatusOr<MpcConfig> FromConfig(const KeyValueConfig& config);
};

struct MpcProblem {
  PlannerModel model = PlannerModel::kProposed;
  Eigen::VectorXd xi0;  // 7 or 5 entries
  PathWindow window;
  EnvelopeFit envelope;
  double vx0 = 0.0;  // frozen for the speed-dependent box
  std::vector<ObstacleParabola> obstacles;
  MpcConfig config;
  double v_max = 0.0;
  BicycleGeometry geometry;

  int num_states() const {
    return model == PlannerModel::kProposed ? kProposedStates
                                            : kKinematicStates;
  }
  int num_steps() const { return config.horizon_steps; }
  int num_controls() const { return kPlanControls * config.horizon_steps; }
};

MpcProblem BuildProblem(PlannerModel model, const PlannerState& xi0,
                        const PathWindow& window, const EnvelopeFit& envelope,
                        std::span<const ObstacleParabola> obstacles,
                        const MpcConfig& config,
                        const BicycleGeometry& geometry = {});

Eigen::VectorXd PackState(PlannerModel model, const PlannerState& state);
PlannerState UnpackState(PlannerModel model, const Eigen::VectorXd& xi,
                         const Eigen::Vector2d& control,
                         const MpcProblem& problem);

// One explicit Euler step xi + h f(xi, u), generic in the scalar type.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> DiscreteStep(
    const MpcProblem& problem, const Eigen::Matrix<T, Eigen::Dynamic, 1>& xi,
    const Eigen::Matrix<T, 2, 1>& u) {
  const T h(problem.config.h);
  Eigen::Matrix<T, Eigen::Dynamic, 1> next = xi;
  if (problem.model == PlannerModel::kProposed) {
    const std::array<T, 7> x{xi(0), xi(1), xi(2), xi(3), xi(4), xi(5), xi(6)};
    const auto f = F2di<T>(x, {u(0), u(1), T(problem.envelope.gamma) * u(1)});
    for (int i = 0; i < 7; ++i) next(i) += h * f[i];
  } else {
    const std::array<T, 5> x{xi(0), xi(1), xi(2), xi(3), xi(4)};
    const auto f = FBicycle<T>(x, {u(0), u(1)}, problem.geometry);
    for (int i = 0; i < 5; ++i) next(i) += h * f[i];
  }
  return next;
}

// Analytic Jacobians of DiscreteStep.
void StepJacobians(const MpcProblem& problem, const Eigen::VectorXd& xi,
                   const Eigen::Vector2d& u, Eigen::MatrixXd* a,
                   Eigen::MatrixXd* b);

// Node states 0..K from xi0 under the stacked controls.
template <typename T>
std::vector<Eigen::Matrix<T, Eigen::Dynamic, 1>> Rollout(
    const MpcProblem& problem, const Eigen::Matrix<T, Eigen::Dynamic, 1>& u) {
  std::vector<Eigen::Matrix<T, Eigen::Dynamic, 1>> states;
  states.reserve(problem.num_steps() + 1);
  states.push_back(problem.xi0.cast<T>());
  for (int k = 0; k < problem.num_steps(); ++k) {
    const Eigen::Matrix<T, 2, 1> uk = u.template segment<2>(2 * k);
    states.push_back(DiscreteStep<T>(problem, states.back(), uk));
  }
  return states;
}

// Tracking residuals at node k >= 1, weighted so that their squared sum is
// the cost: sqrt(w_v)(v - v_max), sqrt(w_X)(X - p_X(s)), sqrt(w_Y)(Y - p_Y(s)).
template <typename T>
Eigen::Matrix<T, 3, 1> TrackingResidual(
    const MpcProblem& problem, const Eigen::Matrix<T, Eigen::Dynamic, 1>& xi) {
  using std::sqrt;
  const int v_index = 3;
  const int s_index = problem.num_states() - 1;
  const T s = xi(s_index);
  // Reference evaluated through the window polynomial.
  const PathWindow& w = problem.window;
  const T t0 = s - T(w.s0);
  const T tc = t0 < T(0) ? T(0) : (t0 > T(w.length) ? T(w.length) : t0);
  const T e = t0 - tc;
  T px(0), py(0), dpx(0), dpy(0);
  for (int k = 5; k >= 0; --k) {
    px = px * tc + T(w.px[k]);
    py = py * tc + T(w.py[k]);
  }
  for (int k = 5; k >= 1; --k) {
    dpx = dpx * tc + T(k * w.px[k]);
    dpy = dpy * tc + T(k * w.py[k]);
  }
  px += e * dpx;
  py += e * dpy;
  Eigen::Matrix<T, 3, 1> r;
  r(0) = T(std::sqrt(problem.config.w_v)) * (xi(v_index) - T(problem.v_max));
  r(1) = T(std::sqrt(problem.config.w_x)) * (xi(0) - px);
  r(2) = T(std::sqrt(problem.config.w_y)) * (xi(1) - py);
  return r;
}

// Jacobian of TrackingResidual with respect to the node state.
Eigen::MatrixXd TrackingResidualJacobian(const MpcProblem& problem,
                                         const Eigen::VectorXd& xi);

// Cost of a control sequence: tracking terms over nodes 1..K plus
// w_o max(0, p_o)^2 per obstacle and node.
double Objective(const MpcProblem& problem, const Eigen::VectorXd& u);

// Linear control constraints C u_k <= d for one node (box and, for the
// proposed model, the two half-planes).
void LinearControlConstraints(const MpcProblem& problem, Eigen::MatrixXd* c,
                              Eigen::VectorXd* d);

// Moves a control into the feasible set. Proposed model: radial scaling
// toward the origin, which lies inside every constraint. Bicycle: box clip.
// Identity for feasible controls.
Eigen::Vector2d ProjectControl(const MpcProblem& problem,
                               const Eigen::Vector2d& u);

bool ControlFeasible(const MpcProblem& problem, const Eigen::Vector2d& u,
                     double tolerance);

struct SolveStats {
  enum class Termination { kIterationCap, kConverged, kNumericalFailure };
  int sqp_iterations = 0;
  int qp_iterations = 0;
  double kkt_residual = 0.0;
  double step_norm = 0.0;  // inf-norm of the last accepted step
  double wall_ms = 0.0;
  Termination termination = Termination::kIterationCap;
  bool degraded = false;
  int lambda_increases = 0;
  std::vector<double> merit_history;  // merit after every iteration
};

const char* TerminationName(SolveStats::Termination termination);

struct MpcSolution {
  PlannerModel model = PlannerModel::kProposed;
  double h = 0.2;
  std::vector<PlannerState> states;       // K + 1
  std::vector<Eigen::Vector2d> controls;  // K; [u_x, u_y] or [a, delta]
  std::vector<double> upsi;               // K; gamma u_y (proposed only)
  std::vector<std::array<double, 3>> tracking_slacks;  // K + 1; [v, X, Y]
  std::vector<std::vector<double>> obstacle_slacks;    // K + 1 x obstacles
  double objective = 0.0;
  double v_max = 0.0;
  SolveStats stats;

  Eigen::VectorXd StackedControls() const;
  // Linear interpolation of node states at time t after the plan start.
  PlannerState StateAt(double t) const;
};

// Rolls the controls out and fills states, slacks and objective.
MpcSolution MakeSolution(const MpcProblem& problem, const Eigen::VectorXd& u);

// Zero controls, constant-velocity rollout.
Eigen::VectorXd ColdStart(const MpcProblem& problem);

// Previous controls shifted by `elapsed` seconds, linearly interpolated
// between nodes and holding the final control, then projected onto the
// current constraints.
Eigen::VectorXd WarmStart(const MpcSolution& previous, double elapsed,
                          const MpcProblem& problem);

// Per-node CSV of a solution.
absl::Status WriteSolutionCsv(const std::string& path,
                              const MpcSolution& solution);

}  // namespace limitplan

#endif  // LIMITPLAN_PLANNER_H_
