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

#include "limitplan/planner.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace limitplan {
namespace {

double BicycleSlip(const BicycleGeometry& g, double delta) {
  return std::atan(g.lr / (g.lr + g.lf) * std::tan(delta));
}

}  // namespace

const char* PlannerModelName(PlannerModel model) {
  return model == PlannerModel::kProposed ? "proposed" : "kinematic";
}

absl::StatusOr<PlannerModel> ParsePlannerModel(const std::string& name) {
  if (name == "proposed") return PlannerModel::kProposed;
  if (name == "kinematic") return PlannerModel::kKinematic;
  return absl::InvalidArgumentError(
      absl::StrCat("model must be proposed or kinematic, got `", name, "`"));
}

absl::Status MpcConfig::Validate() const {
  if (!(h > 0.0) || horizon_steps < 1) {
    return absl::InvalidArgumentError("mpc step and horizon must be positive");
  }
  if (w_v < 0.0 || w_x < 0.0 || w_y < 0.0 || w_o < 0.0) {
    return absl::InvalidArgumentError("mpc weights must be >= 0");
  }
  if (max_iterations_proposed < 1 || max_iterations_kinematic < 1) {
    return absl::InvalidArgumentError("iteration caps must be >= 1");
  }
  if (!(replan_period > 0.0)) {
    return absl::InvalidArgumentError("replan period must be positive");
  }
  return absl::OkStatus();
}

absl::StatusOr<MpcConfig> MpcConfig::FromConfig(const KeyValueConfig& config) {
  MpcConfig c;
  absl::Status status;
  status.Update(config.Read("mpc.h", &c.h));
  status.Update(config.Read("mpc.horizon_steps", &c.horizon_steps));
  status.Update(config.Read("mpc.w_v", &c.w_v));
  status.Update(config.Read("mpc.w_x", &c.w_x));
  status.Update(config.Read("mpc.w_y", &c.w_y));
  status.Update(config.Read("mpc.w_o", &c.w_o));
  status.Update(
      config.Read("mpc.max_iterations_proposed", &c.max_iterations_proposed));
  status.Update(
      config.Read("mpc.max_iterations_kinematic", &c.max_iterations_kinematic));
  status.Update(config.Read("mpc.replan_period", &c.replan_period));
  if (!status.ok()) return status;
  if (auto s = c.Validate(); !s.ok()) return s;
  return c;
}

MpcProblem BuildProblem(PlannerModel model, const PlannerState& xi0,
                        const PathWindow& window, const EnvelopeFit& envelope,
                        std::span<const ObstacleParabola> obstacles,
                        const MpcConfig& config,
                        const BicycleGeometry& geometry) {
  MpcProblem p;
  p.model = model;
  p.xi0 = PackState(model, xi0);
  p.window = window;
  p.envelope = envelope;
  p.vx0 = xi0.vx;
  p.obstacles.assign(obstacles.begin(), obstacles.end());
  p.config = config;
  p.v_max = window.v_max;
  p.geometry = geometry;
  return p;
}

Eigen::VectorXd PackState(PlannerModel model, const PlannerState& st) {
  if (model == PlannerModel::kProposed) {
    Eigen::VectorXd xi(kProposedStates);
    xi << st.x, st.y, st.psi, st.vx, st.vy, st.vpsi, st.s;
    return xi;
  }
  Eigen::VectorXd xi(kKinematicStates);
  xi << st.x, st.y, st.psi, st.vx, st.s;
  return xi;
}

PlannerState UnpackState(PlannerModel model, const Eigen::VectorXd& xi,
                         const Eigen::Vector2d& control,
                         const MpcProblem& problem) {
  PlannerState st;
  st.x = xi(0);
  st.y = xi(1);
  st.psi = xi(2);
  st.vx = xi(3);
  if (model == PlannerModel::kProposed) {
    st.vy = xi(4);
    st.vpsi = xi(5);
    st.s = xi(6);
  } else {
    st.vpsi = xi(3) / problem.geometry.lr *
              std::sin(BicycleSlip(problem.geometry, control(1)));
    st.s = xi(4);
  }
  return st;
}

void StepJacobians(const MpcProblem& problem, const Eigen::VectorXd& xi,
                   const Eigen::Vector2d& u, Eigen::MatrixXd* a,
                   Eigen::MatrixXd* b) {
  const int n = problem.num_states();
  const double h = problem.config.h;
  a->setIdentity(n, n);
  b->setZero(n, kPlanControls);
  if (problem.model == PlannerModel::kProposed) {
    const double c = std::cos(xi(2)), s = std::sin(xi(2));
    const double vx = xi(3), vy = xi(4);
    const double rate =
        std::sqrt(vx * vx + vy * vy + kArcRateEpsilon * kArcRateEpsilon);
    (*a)(0, 2) += h * (-vx * s - vy * c);
    (*a)(1, 2) += h * (vx * c - vy * s);
    (*a)(0, 3) += h * c;
    (*a)(1, 3) += h * s;
    (*a)(0, 4) += -h * s;
    (*a)(1, 4) += h * c;
    (*a)(2, 5) += h;
    (*a)(6, 3) += h * vx / rate;
    (*a)(6, 4) += h * vy / rate;
    (*b)(3, 0) = h;
    (*b)(4, 1) = h;
    (*b)(5, 1) = h * problem.envelope.gamma;
    return;
  }
  const BicycleGeometry& g = problem.geometry;
  const double k = g.lr / (g.lr + g.lf);
  const double tan_d = std::tan(u(1));
  const double slip = std::atan(k * tan_d);
  const double dslip =
      k * (1.0 + tan_d * tan_d) / (1.0 + k * k * tan_d * tan_d);
  const double v = xi(3);
  const double heading = xi(2) + slip;
  const double ch = std::cos(heading), sh = std::sin(heading);
  const double rate = std::sqrt(v * v + kArcRateEpsilon * kArcRateEpsilon);
  (*a)(0, 2) += -h * v * sh;
  (*a)(1, 2) += h * v * ch;
  (*a)(0, 3) += h * ch;
  (*a)(1, 3) += h * sh;
  (*a)(2, 3) += h * std::sin(slip) / g.lr;
  (*a)(4, 3) += h * v / rate;
  (*b)(3, 0) = h;
  (*b)(0, 1) = -h * v * sh * dslip;
  (*b)(1, 1) = h * v * ch * dslip;
  (*b)(2, 1) = h * v / g.lr * std::cos(slip) * dslip;
}

Eigen::MatrixXd TrackingResidualJacobian(const MpcProblem& problem,
                                         const Eigen::VectorXd& xi) {
  const int n = problem.num_states();
  const double s = xi(n - 1);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(3, n);
  j(0, 3) = std::sqrt(problem.config.w_v);
  const double wx = std::sqrt(problem.config.w_x);
  const double wy = std::sqrt(problem.config.w_y);
  j(1, 0) = wx;
  j(1, n - 1) = -wx * problem.window.dX(s);
  j(2, 1) = wy;
  j(2, n - 1) = -wy * problem.window.dY(s);
  return j;
}

double Objective(const MpcProblem& problem, const Eigen::VectorXd& u) {
  const auto states = Rollout<double>(problem, u);
  double j = 0.0;
  for (int k = 1; k <= problem.num_steps(); ++k) {
    j += TrackingResidual<double>(problem, states[k]).squaredNorm();
    for (const ObstacleParabola& o : problem.obstacles) {
      const double p = std::max(0.0, o.Evaluate(states[k](0), states[k](1)));
      j += problem.config.w_o * p * p;
    }
  }
  return j;
}

void LinearControlConstraints(const MpcProblem& problem, Eigen::MatrixXd* c,
                              Eigen::VectorXd* d) {
  const double ax_min = problem.envelope.AxMin(problem.vx0);
  const double ax_max = problem.envelope.AxMax(problem.vx0);
  if (problem.model == PlannerModel::kProposed) {
    c->resize(4, 2);
    d->resize(4);
    *c << 1.0, 0.0, -1.0, 0.0, problem.envelope.a;
    *d << ax_max, -ax_min, problem.envelope.b;
    return;
  }
  const double dm = problem.geometry.delta_max;
  c->resize(4, 2);
  d->resize(4);
  *c << 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0;
  *d << ax_max, -ax_min, dm, dm;
}

Eigen::Vector2d ProjectControl(const MpcProblem& problem,
                               const Eigen::Vector2d& u) {
  if (problem.model == PlannerModel::kKinematic) {
    const double dm = problem.geometry.delta_max;
    return {std::clamp(u(0), problem.envelope.AxMin(problem.vx0),
                       problem.envelope.AxMax(problem.vx0)),
            std::clamp(u(1), -dm, dm)};
  }
  const double norm = u.norm();
  if (norm == 0.0) return u;
  const double r =
      RegionRadius(problem.envelope, problem.vx0, u(0) / norm, u(1) / norm);
  return norm > r ? Eigen::Vector2d(u * (r / norm)) : u;
}

bool ControlFeasible(const MpcProblem& problem, const Eigen::Vector2d& u,
                     double tolerance) {
  if (problem.model == PlannerModel::kProposed) {
    return CheckMembership(problem.envelope, problem.vx0, u(0), u(1),
                           problem.envelope.gamma * u(1), tolerance);
  }
  Eigen::MatrixXd c;
  Eigen::VectorXd d;
  LinearControlConstraints(problem, &c, &d);
  return (c * u - d).maxCoeff() <= tolerance;
}

const char* TerminationName(SolveStats::Termination termination) {
  switch (termination) {
    case SolveStats::Termination::kIterationCap:
      return "iteration_cap";
    case SolveStats::Termination::kConverged:
      return "converged";
    case SolveStats::Termination::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

Eigen::VectorXd MpcSolution::StackedControls() const {
  Eigen::VectorXd u(kPlanControls * controls.size());
  for (size_t k = 0; k < controls.size(); ++k)
    u.segment<2>(2 * k) = controls[k];
  return u;
}

PlannerState MpcSolution::StateAt(double t) const {
  if (states.empty()) return {};
  const double pos = std::max(0.0, t / h);
  const int k = static_cast<int>(pos);
  if (k >= static_cast<int>(states.size()) - 1) return states.back();
  const double w = pos - k;
  const PlannerState& a = states[k];
  const PlannerState& b = states[k + 1];
  auto lerp = [w](double x, double y) { return x + w * (y - x); };
  return {lerp(a.x, b.x),   lerp(a.y, b.y),   lerp(a.psi, b.psi),
          lerp(a.vx, b.vx), lerp(a.vy, b.vy), lerp(a.vpsi, b.vpsi),
          lerp(a.s, b.s)};
}

MpcSolution MakeSolution(const MpcProblem& problem, const Eigen::VectorXd& u) {
  MpcSolution sol;
  sol.model = problem.model;
  sol.h = problem.config.h;
  sol.v_max = problem.v_max;
  const int steps = problem.num_steps();
  const auto states = Rollout<double>(problem, u);
  for (int k = 0; k < steps; ++k) {
    const Eigen::Vector2d uk = u.segment<2>(2 * k);
    sol.controls.push_back(uk);
    sol.upsi.push_back(problem.model == PlannerModel::kProposed
                           ? problem.envelope.gamma * uk(1)
                           : 0.0);
  }
  for (int k = 0; k <= steps; ++k) {
    const Eigen::Vector2d uk = sol.controls[std::min(k, steps - 1)];
    const PlannerState st = UnpackState(problem.model, states[k], uk, problem);
    sol.states.push_back(st);
    sol.tracking_slacks.push_back({std::abs(st.vx - problem.v_max),
                                   std::abs(st.x - problem.window.X(st.s)),
                                   std::abs(st.y - problem.window.Y(st.s))});
    std::vector<double> o_tol;
    for (const ObstacleParabola& o : problem.obstacles) {
      o_tol.push_back(std::max(0.0, o.Evaluate(st.x, st.y)));
    }
    sol.obstacle_slacks.push_back(std::move(o_tol));
  }
  sol.objective = Objective(problem, u);
  return sol;
}

Eigen::VectorXd ColdStart(const MpcProblem& problem) {
  return Eigen::VectorXd::Zero(problem.num_controls());
}

Eigen::VectorXd WarmStart(const MpcSolution& previous, double elapsed,
                          const MpcProblem& problem) {
  const int prev_steps = static_cast<int>(previous.controls.size());
  if (previous.model != problem.model || prev_steps == 0 ||
      !(previous.h > 0.0)) {
    return ColdStart(problem);
  }
  Eigen::VectorXd u(problem.num_controls());
  for (int k = 0; k < problem.num_steps(); ++k) {
    const double pos = (k * problem.config.h + elapsed) / previous.h;
    const int j = static_cast<int>(std::floor(pos));
    Eigen::Vector2d uk;
    if (j >= prev_steps - 1) {
      uk = previous.controls.back();
    } else {
      const double w = pos - j;
      uk = (1.0 - w) * previous.controls[std::max(j, 0)] +
           w * previous.controls[j + 1];
    }
    u.segment<2>(2 * k) = ProjectControl(problem, uk);
  }
  return u;
}

absl::Status WriteSolutionCsv(const std::string& path,
                              const MpcSolution& solution) {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  const size_t n_obs =
      solution.obstacle_slacks.empty() ? 0 : solution.obstacle_slacks[0].size();
  out << "node,t,x,y,psi,vx,vy,vpsi,s,u0,u1,upsi,v_tol,x_tol,y_tol";
  for (size_t o = 0; o < n_obs; ++o) out << ",o_tol_" << o;
  out << "\n";
  for (size_t k = 0; k < solution.states.size(); ++k) {
    const PlannerState& st = solution.states[k];
    const bool has_u = k < solution.controls.size();
    out << absl::StrFormat(
        "%d,%.3f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
        "%.9g",
        k, k * solution.h, st.x, st.y, st.psi, st.vx, st.vy, st.vpsi, st.s,
        has_u ? solution.controls[k](0) : 0.0,
        has_u ? solution.controls[k](1) : 0.0, has_u ? solution.upsi[k] : 0.0,
        solution.tracking_slacks[k][0], solution.tracking_slacks[k][1],
        solution.tracking_slacks[k][2]);
    for (double o : solution.obstacle_slacks[k])
      out << absl::StrFormat(",%.9g", o);
    out << "\n";
  }
  return out.good() ? absl::OkStatus()
                    : absl::DataLossError(absl::StrCat("short write ", path));
}

}  // namespace limitplan
