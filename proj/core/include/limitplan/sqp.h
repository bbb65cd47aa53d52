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

// Iteration-capped SQP for MpcProblem.
//
// The transcription is condensed: node states are an explicit Euler rollout
// of the controls, so the dynamics hold exactly at every iterate and the QP
// variables are the control step plus one obstacle slack per (obstacle,
// node). Each iteration linearizes tracking residuals (Gauss-Newton),
// obstacle parabolas and the ellipse (tangent at the ray through the current
// control), solves the QP, projects the new controls back into the envelope
// and accepts the step only if the cost does not increase.

#ifndef LIMITPLAN_SQP_H_
#define LIMITPLAN_SQP_H_

#include <vector>

#include "Eigen/Core"
#include "limitplan/planner.h"
#include "limitplan/qp.h"

namespace limitplan {

struct SqpOptions {
  // Levenberg weights, relative to the largest diagonal entry of the
  // Gauss-Newton Hessian.
  double lambda_initial = 1e-8;
  double lambda_min = 1e-10;
  double lambda_max = 1e6;
  // Start each solve from the weight the previous solve ended with instead
  // of lambda_initial.
  bool carry_lambda = true;
  double step_tolerance = 1e-8;  // inf-norm of the control step
  int max_qp_failures = 3;
  QpOptions qp;
};

// Rollout and first-order model at a control sequence.
struct Linearization {
  std::vector<Eigen::VectorXd> states;       // K + 1
  std::vector<Eigen::MatrixXd> sensitivity;  // d states[k] / d u, n x 2K
  Eigen::VectorXd residual;                  // 3K tracking residuals
  Eigen::MatrixXd residual_jacobian;         // 3K x 2K
  Eigen::VectorXd obstacle_value;            // p_o at node k, o-major per k
  Eigen::MatrixXd obstacle_jacobian;         // (K * O) x 2K
};

Linearization Linearize(const MpcProblem& problem, const Eigen::VectorXd& u);

// QP for the step from `u` with Levenberg weight `lambda`.
QpSubproblem BuildQpSubproblem(const MpcProblem& problem,
                               const Eigen::VectorXd& u,
                               const Linearization& lin, double lambda);

class SqpSolver {
 public:
  explicit SqpSolver(SqpOptions options = {}) : options_(options) {}

  MpcSolution Solve(const MpcProblem& problem, const Eigen::VectorXd& guess,
                    int max_iterations);

  // Levenberg weight the next solve starts from.
  double lambda() const { return lambda_; }
  void Reset() { lambda_ = options_.lambda_initial; }

 private:
  SqpOptions options_;
  double lambda_ = options_.lambda_initial;
};

// Convenience wrapper with default options.
MpcSolution SqpSolve(const MpcProblem& problem, const Eigen::VectorXd& guess,
                     int max_iterations);

struct GradientCheckReport {
  double dynamics = 0.0;     // per-step A_k, B_k
  double sensitivity = 0.0;  // condensed d states / d u
  double cost = 0.0;         // tracking residual Jacobian
  double obstacle = 0.0;     // parabola gradients along the rollout
  double ellipse = 0.0;      // ellipse gradient at each control
  double linear = 0.0;       // box and half-plane rows
  double max() const;
};

// Analytic derivatives against central differences (step 1e-6 max(1, |x|),
// evaluated in long double). Errors are |a - fd| / max(1, |a|, |fd|).
GradientCheckReport GradientCheck(const MpcProblem& problem,
                                  const Eigen::VectorXd& u);

}  // namespace limitplan

#endif  // LIMITPLAN_SQP_H_
