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

// Dense convex QP:
//
//   minimize    0.5 x'Hx + g'x
//   subject to  A_eq x  = b_eq
//               A_in x <= b_in
//
// Solved with the Goldfarb-Idnani dual active-set method. Positive
// semidefinite H is handled by an outer proximal-point loop.

#ifndef LIMITPLAN_QP_H_
#define LIMITPLAN_QP_H_

#include "Eigen/Core"

namespace limitplan {

struct QpSubproblem {
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_in;
  Eigen::VectorXd b_in;

  // Zero-sized constraint blocks with the right column count.
  static QpSubproblem WithSize(int n);
  int num_variables() const { return static_cast<int>(g.size()); }
};

enum class QpStatus { kOptimal, kInfeasible, kIterationLimit, kBadInput };

const char* QpStatusName(QpStatus status);

struct QpSolution {
  QpStatus status = QpStatus::kBadInput;
  Eigen::VectorXd x;
  // Multipliers in H x + g + A_eq' y_eq + A_in' y_in = 0, y_in >= 0.
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_in;
  double objective = 0.0;
  int iterations = 0;  // active-set changes, summed over proximal rounds
};

struct QpResiduals {
  double primal = 0.0;           // max equality / inequality violation
  double dual = 0.0;             // inf-norm of the Lagrangian gradient
  double complementarity = 0.0;  // max |y_i (A_in x - b_in)_i|
  double dual_sign = 0.0;        // max(-y_in, 0)
};

QpResiduals ComputeResiduals(const QpSubproblem& qp, const QpSolution& sol);

struct QpOptions {
  int max_iterations = 2000;
  // Proximal weight relative to max(1, max |H_ii|) when H is singular.
  double proximal_weight = 1e-4;
  int max_proximal_rounds = 5000;
};

QpSolution SolveQp(const QpSubproblem& qp, const QpOptions& options = {});

}  // namespace limitplan

#endif  // LIMITPLAN_QP_H_
