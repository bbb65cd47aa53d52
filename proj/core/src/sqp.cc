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

#include <algorithm>
#include <chrono>
#include <cmath>

namespace limitplan {
namespace {

using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

double RelativeError(double analytic, long double numeric) {
  const double fd = static_cast<double>(numeric);
  const double scale = std::max({1.0, std::abs(analytic), std::abs(fd)});
  return std::abs(analytic - fd) / scale;
}

long double FdStep(long double x) {
  return 1e-6L * std::max(1.0L, std::abs(x));
}

template <typename T>
T EvaluateParabola(const ObstacleParabola& o, T x, T y) {
  return T(o.c[0]) + T(o.c[1]) * x + T(o.c[2]) * y + T(o.c[3]) * x * x +
         T(o.c[4]) * x * y + T(o.c[5]) * y * y;
}

// Tangent half-plane of the ellipse at the boundary point on the ray through
// u: n'(u + du) <= n'u_b. Returns false for u = 0.
bool EllipseTangent(const EnvelopeFit& fit, const Eigen::Vector2d& u,
                    Eigen::Vector2d* normal, double* rhs) {
  const double e = u(0) * u(0) / (fit.alpha * fit.alpha) +
                   u(1) * u(1) / (fit.beta * fit.beta);
  if (!(e > 1e-12)) return false;
  const Eigen::Vector2d ub = u / std::sqrt(e);
  *normal = Eigen::Vector2d(ub(0) / (fit.alpha * fit.alpha),
                            ub(1) / (fit.beta * fit.beta));
  *rhs = normal->dot(ub);
  return true;
}

}  // namespace

Linearization Linearize(const MpcProblem& problem, const Eigen::VectorXd& u) {
  const int n = problem.num_states();
  const int steps = problem.num_steps();
  const int nu = problem.num_controls();
  const int n_obs = static_cast<int>(problem.obstacles.size());
  Linearization lin;
  lin.states = Rollout<double>(problem, u);
  lin.sensitivity.assign(steps + 1, Eigen::MatrixXd::Zero(n, nu));
  lin.residual.resize(3 * steps);
  lin.residual_jacobian.resize(3 * steps, nu);
  lin.obstacle_value.resize(steps * n_obs);
  lin.obstacle_jacobian.resize(steps * n_obs, nu);
  Eigen::MatrixXd a, b;
  for (int k = 0; k < steps; ++k) {
    StepJacobians(problem, lin.states[k], u.segment<2>(2 * k), &a, &b);
    // Only the first 2k columns of the previous sensitivity are nonzero.
    lin.sensitivity[k + 1].leftCols(2 * k).noalias() =
        a * lin.sensitivity[k].leftCols(2 * k);
    lin.sensitivity[k + 1].middleCols(2 * k, 2) = b;
  }
  for (int k = 1; k <= steps; ++k) {
    const Eigen::VectorXd& xi = lin.states[k];
    const Eigen::MatrixXd& sk = lin.sensitivity[k];
    lin.residual.segment<3>(3 * (k - 1)) =
        TrackingResidual<double>(problem, xi);
    lin.residual_jacobian.middleRows(3 * (k - 1), 3).noalias() =
        TrackingResidualJacobian(problem, xi) * sk;
    for (int o = 0; o < n_obs; ++o) {
      const ObstacleParabola& p = problem.obstacles[o];
      const int row = (k - 1) * n_obs + o;
      lin.obstacle_value(row) = p.Evaluate(xi(0), xi(1));
      const auto grad = p.Gradient(xi(0), xi(1));
      lin.obstacle_jacobian.row(row) =
          grad[0] * sk.row(0) + grad[1] * sk.row(1);
    }
  }
  return lin;
}

QpSubproblem BuildQpSubproblem(const MpcProblem& problem,
                               const Eigen::VectorXd& u,
                               const Linearization& lin, double lambda) {
  const int steps = problem.num_steps();
  const int nu = problem.num_controls();
  const bool soft_obstacles =
      !problem.obstacles.empty() && problem.config.w_o > 0.0;
  const int n_slack =
      soft_obstacles ? static_cast<int>(lin.obstacle_value.size()) : 0;
  const int nz = nu + n_slack;

  QpSubproblem qp = QpSubproblem::WithSize(nz);
  const Eigen::MatrixXd& jr = lin.residual_jacobian;
  qp.h.topLeftCorner(nu, nu).noalias() = 2.0 * jr.transpose() * jr;
  const double scale =
      std::max(1.0, qp.h.topLeftCorner(nu, nu).diagonal().maxCoeff());
  qp.h.topLeftCorner(nu, nu).diagonal().array() += 2.0 * lambda * scale;
  // Controls with no influence on the linearized cost (the final lateral
  // command only moves the last node's lateral velocity) get unit curvature
  // so the subproblem stays strictly convex; their step is then zero.
  for (int i = 0; i < nu; ++i) {
    const bool free_obstacles = lin.obstacle_jacobian.rows() == 0 ||
                                lin.obstacle_jacobian.col(i).isZero(0.0);
    if (jr.col(i).isZero(0.0) && free_obstacles) qp.h(i, i) += 2.0;
  }
  if (n_slack > 0) {
    qp.h.bottomRightCorner(n_slack, n_slack)
        .diagonal()
        .setConstant(2.0 * problem.config.w_o);
  }
  qp.g.head(nu).noalias() = 2.0 * jr.transpose() * lin.residual;

  Eigen::MatrixXd c;
  Eigen::VectorXd d;
  LinearControlConstraints(problem, &c, &d);
  const bool ellipse = problem.model == PlannerModel::kProposed;
  const int per_node = static_cast<int>(c.rows()) + (ellipse ? 1 : 0);
  const int m = steps * per_node + n_slack;
  qp.a_in = Eigen::MatrixXd::Zero(m, nz);
  qp.b_in = Eigen::VectorXd::Zero(m);
  int row = 0;
  for (int k = 0; k < steps; ++k) {
    const Eigen::Vector2d uk = u.segment<2>(2 * k);
    qp.a_in.block(row, 2 * k, c.rows(), 2) = c;
    qp.b_in.segment(row, c.rows()) = d - c * uk;
    row += static_cast<int>(c.rows());
    if (ellipse) {
      Eigen::Vector2d normal;
      double rhs = 0.0;
      if (EllipseTangent(problem.envelope, uk, &normal, &rhs)) {
        qp.a_in.block<1, 2>(row, 2 * k) = normal.transpose();
        qp.b_in(row) = rhs - normal.dot(uk);
      } else {
        // Inactive placeholder keeps the row layout fixed.
        qp.b_in(row) = 1.0;
      }
      ++row;
    }
  }
  for (int i = 0; i < n_slack; ++i, ++row) {
    // p + G du <= O
    qp.a_in.block(row, 0, 1, nu) = lin.obstacle_jacobian.row(i);
    qp.a_in(row, nu + i) = -1.0;
    qp.b_in(row) = -lin.obstacle_value(i);
  }
  return qp;
}

MpcSolution SqpSolver::Solve(const MpcProblem& problem,
                             const Eigen::VectorXd& guess, int max_iterations) {
  const auto start = std::chrono::steady_clock::now();
  const int nu = problem.num_controls();
  SolveStats stats;

  Eigen::VectorXd u = guess.size() == nu ? guess : ColdStart(problem);
  for (int k = 0; k < problem.num_steps(); ++k) {
    u.segment<2>(2 * k) = ProjectControl(problem, u.segment<2>(2 * k));
  }
  double merit = Objective(problem, u);
  double lambda = options_.carry_lambda ? lambda_ : options_.lambda_initial;
  int qp_failures = 0;

  for (int it = 1; it <= max_iterations; ++it) {
    stats.sqp_iterations = it;
    const Linearization lin = Linearize(problem, u);
    const QpSubproblem qp = BuildQpSubproblem(problem, u, lin, lambda);
    const QpSolution qs = SolveQp(qp, options_.qp);
    stats.qp_iterations += qs.iterations;
    if (qs.status != QpStatus::kOptimal) {
      lambda = std::min(10.0 * lambda, options_.lambda_max);
      ++stats.lambda_increases;
      stats.merit_history.push_back(merit);
      if (++qp_failures >= options_.max_qp_failures) {
        stats.degraded = true;
        stats.termination = SolveStats::Termination::kNumericalFailure;
        break;
      }
      continue;
    }
    const Eigen::VectorXd du = qs.x.head(nu);
    stats.kkt_residual = (qp.h.topRows(nu) * qs.x).lpNorm<Eigen::Infinity>();
    const double step = du.lpNorm<Eigen::Infinity>();
    if (step <= options_.step_tolerance) {
      stats.step_norm = step;
      stats.merit_history.push_back(merit);
      stats.termination = SolveStats::Termination::kConverged;
      break;
    }
    Eigen::VectorXd trial = u + du;
    for (int k = 0; k < problem.num_steps(); ++k) {
      trial.segment<2>(2 * k) =
          ProjectControl(problem, trial.segment<2>(2 * k));
    }
    const double trial_merit = Objective(problem, trial);
    if (std::isfinite(trial_merit) && trial_merit <= merit) {
      stats.step_norm = (trial - u).lpNorm<Eigen::Infinity>();
      u = trial;
      merit = trial_merit;
      lambda = std::max(lambda / 10.0, options_.lambda_min);
    } else {
      lambda = std::min(10.0 * lambda, options_.lambda_max);
      ++stats.lambda_increases;
    }
    stats.merit_history.push_back(merit);
  }

  lambda_ = lambda;
  MpcSolution sol = MakeSolution(problem, u);
  stats.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  sol.stats = std::move(stats);
  return sol;
}

MpcSolution SqpSolve(const MpcProblem& problem, const Eigen::VectorXd& guess,
                     int max_iterations) {
  SqpSolver solver;
  return solver.Solve(problem, guess, max_iterations);
}

double GradientCheckReport::max() const {
  return std::max({dynamics, sensitivity, cost, obstacle, ellipse, linear});
}

GradientCheckReport GradientCheck(const MpcProblem& problem,
                                  const Eigen::VectorXd& u) {
  GradientCheckReport report;
  const int n = problem.num_states();
  const int steps = problem.num_steps();
  const int nu = problem.num_controls();
  const Linearization lin = Linearize(problem, u);
  const LongVector ul = u.cast<long double>();

  // Per-step Jacobians.
  Eigen::MatrixXd a, b;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd& xi = lin.states[k];
    const Eigen::Vector2d uk = u.segment<2>(2 * k);
    StepJacobians(problem, xi, uk, &a, &b);
    const LongVector xl = xi.cast<long double>();
    const Eigen::Matrix<long double, 2, 1> ukl = uk.cast<long double>();
    for (int j = 0; j < n; ++j) {
      LongVector plus = xl, minus = xl;
      const long double hstep = FdStep(xl(j));
      plus(j) += hstep;
      minus(j) -= hstep;
      const LongVector fd = (DiscreteStep<long double>(problem, plus, ukl) -
                             DiscreteStep<long double>(problem, minus, ukl)) /
                            (plus(j) - minus(j));
      for (int i = 0; i < n; ++i) {
        report.dynamics =
            std::max(report.dynamics, RelativeError(a(i, j), fd(i)));
      }
    }
    for (int j = 0; j < 2; ++j) {
      Eigen::Matrix<long double, 2, 1> plus = ukl, minus = ukl;
      const long double hstep = FdStep(ukl(j));
      plus(j) += hstep;
      minus(j) -= hstep;
      const LongVector fd = (DiscreteStep<long double>(problem, xl, plus) -
                             DiscreteStep<long double>(problem, xl, minus)) /
                            (plus(j) - minus(j));
      for (int i = 0; i < n; ++i) {
        report.dynamics =
            std::max(report.dynamics, RelativeError(b(i, j), fd(i)));
      }
    }
  }

  // Condensed sensitivities, residual Jacobian and obstacle gradients.
  const int n_obs = static_cast<int>(problem.obstacles.size());
  for (int j = 0; j < nu; ++j) {
    LongVector plus = ul, minus = ul;
    const long double hstep = FdStep(ul(j));
    plus(j) += hstep;
    minus(j) -= hstep;
    const long double width = plus(j) - minus(j);
    const auto sp = Rollout<long double>(problem, plus);
    const auto sm = Rollout<long double>(problem, minus);
    for (int k = 1; k <= steps; ++k) {
      const LongVector ds = (sp[k] - sm[k]) / width;
      for (int i = 0; i < n; ++i) {
        report.sensitivity = std::max(
            report.sensitivity, RelativeError(lin.sensitivity[k](i, j), ds(i)));
      }
      const auto rp = TrackingResidual<long double>(problem, sp[k]);
      const auto rm = TrackingResidual<long double>(problem, sm[k]);
      for (int i = 0; i < 3; ++i) {
        report.cost =
            std::max(report.cost,
                     RelativeError(lin.residual_jacobian(3 * (k - 1) + i, j),
                                   (rp(i) - rm(i)) / width));
      }
      for (int o = 0; o < n_obs; ++o) {
        const ObstacleParabola& p = problem.obstacles[o];
        const long double fd =
            (EvaluateParabola<long double>(p, sp[k](0), sp[k](1)) -
             EvaluateParabola<long double>(p, sm[k](0), sm[k](1))) /
            width;
        report.obstacle = std::max(
            report.obstacle,
            RelativeError(lin.obstacle_jacobian((k - 1) * n_obs + o, j), fd));
      }
    }
  }

  // Control constraint rows.
  Eigen::MatrixXd c;
  Eigen::VectorXd d;
  LinearControlConstraints(problem, &c, &d);
  const Eigen::Matrix<long double, Eigen::Dynamic, 2> cl =
      c.cast<long double>();
  const long double ia = 1.0L / problem.envelope.alpha;
  const long double ib = 1.0L / problem.envelope.beta;
  auto ellipse = [&](const Eigen::Matrix<long double, 2, 1>& v) {
    return v(0) * v(0) * ia * ia + v(1) * v(1) * ib * ib;
  };
  for (int k = 0; k < steps; ++k) {
    const Eigen::Matrix<long double, 2, 1> ukl = ul.segment<2>(2 * k);
    const Eigen::Vector2d uk = u.segment<2>(2 * k);
    const Eigen::Vector2d grad(
        2.0 * uk(0) / (problem.envelope.alpha * problem.envelope.alpha),
        2.0 * uk(1) / (problem.envelope.beta * problem.envelope.beta));
    for (int j = 0; j < 2; ++j) {
      Eigen::Matrix<long double, 2, 1> plus = ukl, minus = ukl;
      const long double hstep = FdStep(ukl(j));
      plus(j) += hstep;
      minus(j) -= hstep;
      const long double width = plus(j) - minus(j);
      const auto rows = ((cl * plus - cl * minus) / width).eval();
      for (int i = 0; i < c.rows(); ++i) {
        report.linear =
            std::max(report.linear, RelativeError(c(i, j), rows(i)));
      }
      if (problem.model == PlannerModel::kProposed) {
        report.ellipse = std::max(
            report.ellipse,
            RelativeError(grad(j), (ellipse(plus) - ellipse(minus)) / width));
      }
    }
  }
  return report;
}

}  // namespace limitplan
