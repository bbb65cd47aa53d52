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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "Eigen/Cholesky"
#include "Eigen/Dense"

namespace limitplan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Goldfarb-Idnani on a strictly convex problem. Internally constraints are
// n'x >= c (inequalities) and n'x = c (equalities); the gradient at the
// optimum is sum u_i n_i.
class DualActiveSet {
 public:
  DualActiveSet(const Eigen::VectorXd& g, const Eigen::MatrixXd& a_eq,
                const Eigen::VectorXd& b_eq, const Eigen::MatrixXd& a_in,
                const Eigen::VectorXd& b_in, int max_iterations)
      : n_(static_cast<int>(g.size())),
        me_(static_cast<int>(b_eq.size())),
        mi_(static_cast<int>(b_in.size())),
        g_(g),
        a_eq_(a_eq),
        b_eq_(b_eq),
        a_in_(a_in),
        b_in_(b_in),
        max_iterations_(max_iterations) {}

  QpSolution Solve(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    QpSolution sol;
    const int p = me_ + mi_;
    // J = L^{-T}
    j_ = llt.matrixU().solve(Eigen::MatrixXd::Identity(n_, n_));
    r_ = Eigen::MatrixXd::Zero(n_, n_);
    x_ = -llt.solve(g_);
    // Rounding in x carries the size of the largest iterate.
    double x_peak = x_.lpNorm<Eigen::Infinity>();
    u_ = Eigen::VectorXd::Zero(p + 1);
    active_.assign(p + 1, -1);
    iq_ = 0;
    r_norm_ = 1.0;
    Eigen::VectorXd d(n_), z(n_), r(n_);

    for (int i = 0; i < me_; ++i) {
      const Eigen::VectorXd np = a_eq_.row(i).transpose();
      d.noalias() = j_.transpose() * np;
      UpdateZ(d, z);
      UpdateR(d, r);
      double t2 = 0.0;
      const double zn = z.dot(np);
      if (std::abs(z.dot(z)) > kEps) t2 = (b_eq_(i) - np.dot(x_)) / zn;
      x_ += t2 * z;
      u_(iq_) = t2;
      u_.head(iq_) -= t2 * r.head(iq_);
      active_[iq_] = -i - 1;
      if (!AddConstraint(d)) {
        // Linearly dependent equality; consistent rows are harmless.
        if (std::abs(a_eq_.row(i).dot(x_) - b_eq_(i)) > 1e-9) {
          sol.status = QpStatus::kInfeasible;
          return Finish(sol);
        }
      }
    }

    std::vector<bool> inactive(mi_, true);
    int iterations = 0;
    while (true) {
      if (++iterations > max_iterations_) {
        sol.status = QpStatus::kIterationLimit;
        sol.iterations = iterations;
        return Finish(sol);
      }
      for (int i = me_; i < iq_; ++i) inactive[active_[i]] = false;
      x_peak = std::max(x_peak, x_.lpNorm<Eigen::Infinity>());
      // Most violated inactive constraint.
      int ip = -1;
      double worst = 0.0;
      for (int i = 0; i < mi_; ++i) {
        if (!inactive[i]) continue;
        const double s = b_in_(i) - a_in_.row(i).dot(x_);  // n'x - c
        const double tol = 1e-12 * (1.0 + std::abs(b_in_(i))) +
                           1e3 * kEps * a_in_.row(i).lpNorm<1>() * x_peak;
        if (s < worst && s < -tol) {
          worst = s;
          ip = i;
        }
      }
      if (ip < 0) {
        sol.status = QpStatus::kOptimal;
        sol.iterations = iterations - 1;
        return Finish(sol);
      }
      const Eigen::VectorXd np = -a_in_.row(ip).transpose();
      u_(iq_) = 0.0;
      active_[iq_] = ip;
      double s_ip = worst;

      while (true) {
        d.noalias() = j_.transpose() * np;
        UpdateZ(d, z);
        UpdateR(d, r);
        int l = -1;
        double t1 = kInf;
        for (int k = me_; k < iq_; ++k) {
          if (r(k) > 0.0 && u_(k) / r(k) < t1) {
            t1 = u_(k) / r(k);
            l = active_[k];
          }
        }
        double t2 = kInf;
        if (std::abs(z.dot(z)) > kEps) {
          t2 = -s_ip / z.dot(np);
          if (t2 < 0.0) t2 = kInf;
        }
        const double t = std::min(t1, t2);
        if (t >= kInf) {
          sol.status = QpStatus::kInfeasible;
          sol.iterations = iterations;
          return Finish(sol);
        }
        if (t2 >= kInf) {
          // Step in dual space only.
          u_.head(iq_) -= t * r.head(iq_);
          u_(iq_) += t;
          inactive[l] = true;
          DeleteConstraint(l);
          if (++iterations > max_iterations_) break;
          continue;
        }
        x_ += t * z;
        u_.head(iq_) -= t * r.head(iq_);
        u_(iq_) += t;
        if (t == t2) {
          if (!AddConstraint(d)) {
            // Degenerate: the new normal is dependent on the active ones.
            inactive[ip] = false;
          }
          inactive[ip] = false;
          break;
        }
        inactive[l] = true;
        DeleteConstraint(l);
        if (++iterations > max_iterations_) break;
        s_ip = b_in_(ip) - a_in_.row(ip).dot(x_);
      }
      std::fill(inactive.begin(), inactive.end(), true);
    }
  }

 private:
  void UpdateZ(const Eigen::VectorXd& d, Eigen::VectorXd& z) const {
    z.noalias() = j_.rightCols(n_ - iq_) * d.tail(n_ - iq_);
  }

  void UpdateR(const Eigen::VectorXd& d, Eigen::VectorXd& r) const {
    for (int i = iq_ - 1; i >= 0; --i) {
      double sum = d(i);
      for (int k = i + 1; k < iq_; ++k) sum -= r_(i, k) * r(k);
      r(i) = sum / r_(i, i);
    }
  }

  bool AddConstraint(Eigen::VectorXd& d) {
    for (int j = n_ - 1; j >= iq_ + 1; --j) {
      double cc = d(j - 1);
      double ss = d(j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d(j) = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d(j - 1) = -h;
      } else {
        d(j - 1) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = 0; k < n_; ++k) {
        const double t1 = j_(k, j - 1);
        const double t2 = j_(k, j);
        j_(k, j - 1) = t1 * cc + t2 * ss;
        j_(k, j) = xny * (t1 + j_(k, j - 1)) - t2;
      }
    }
    ++iq_;
    r_.col(iq_ - 1).head(iq_) = d.head(iq_);
    if (std::abs(d(iq_ - 1)) <= kEps * r_norm_) {
      // Undo: the column is (numerically) dependent.
      --iq_;
      return false;
    }
    r_norm_ = std::max(r_norm_, std::abs(d(iq_ - 1)));
    return true;
  }

  void DeleteConstraint(int l) {
    int qq = -1;
    for (int i = me_; i < iq_; ++i) {
      if (active_[i] == l) {
        qq = i;
        break;
      }
    }
    if (qq < 0) return;
    for (int i = qq; i < iq_ - 1; ++i) {
      active_[i] = active_[i + 1];
      u_(i) = u_(i + 1);
      r_.col(i) = r_.col(i + 1);
    }
    active_[iq_ - 1] = active_[iq_];
    u_(iq_ - 1) = u_(iq_);
    active_[iq_] = -1;
    u_(iq_) = 0.0;
    r_.col(iq_ - 1).head(iq_).setZero();
    --iq_;
    for (int j = qq; j < iq_; ++j) {
      double cc = r_(j, j);
      double ss = r_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      r_(j + 1, j) = 0.0;
      if (cc < 0.0) {
        r_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        r_(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < iq_; ++k) {
        const double t1 = r_(j, k);
        const double t2 = r_(j + 1, k);
        r_(j, k) = t1 * cc + t2 * ss;
        r_(j + 1, k) = xny * (t1 + r_(j, k)) - t2;
      }
      for (int k = 0; k < n_; ++k) {
        const double t1 = j_(k, j);
        const double t2 = j_(k, j + 1);
        j_(k, j) = t1 * cc + t2 * ss;
        j_(k, j + 1) = xny * (j_(k, j) + t1) - t2;
      }
    }
  }

  QpSolution& Finish(QpSolution& sol) const {
    sol.x = x_;
    sol.y_eq = Eigen::VectorXd::Zero(me_);
    sol.y_in = Eigen::VectorXd::Zero(mi_);
    for (int k = 0; k < iq_; ++k) {
      const int id = active_[k];
      if (id < 0) {
        sol.y_eq(-id - 1) = -u_(k);
      } else {
        sol.y_in(id) = u_(k);
      }
    }
    return sol;
  }

  int n_, me_, mi_;
  const Eigen::VectorXd& g_;
  const Eigen::MatrixXd& a_eq_;
  const Eigen::VectorXd& b_eq_;
  const Eigen::MatrixXd& a_in_;
  const Eigen::VectorXd& b_in_;
  int max_iterations_;

  Eigen::MatrixXd j_, r_;
  Eigen::VectorXd x_, u_;
  std::vector<int> active_;  // eq: -(i+1), ineq: i
  int iq_ = 0;
  double r_norm_ = 1.0;
};

double Objective(const QpSubproblem& qp, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(qp.h * x) + qp.g.dot(x);
}

}  // namespace

QpSubproblem QpSubproblem::WithSize(int n) {
  QpSubproblem qp;
  qp.h = Eigen::MatrixXd::Zero(n, n);
  qp.g = Eigen::VectorXd::Zero(n);
  qp.a_eq.resize(0, n);
  qp.b_eq.resize(0);
  qp.a_in.resize(0, n);
  qp.b_in.resize(0);
  return qp;
}

const char* QpStatusName(QpStatus status) {
  switch (status) {
    case QpStatus::kOptimal:
      return "optimal";
    case QpStatus::kInfeasible:
      return "infeasible";
    case QpStatus::kIterationLimit:
      return "iteration_limit";
    case QpStatus::kBadInput:
      return "bad_input";
  }
  return "unknown";
}

QpResiduals ComputeResiduals(const QpSubproblem& qp, const QpSolution& sol) {
  QpResiduals res;
  if (sol.x.size() != qp.g.size()) {
    res.primal = res.dual = res.complementarity = kInf;
    return res;
  }
  if (qp.b_eq.size() > 0) {
    res.primal = (qp.a_eq * sol.x - qp.b_eq).cwiseAbs().maxCoeff();
  }
  Eigen::VectorXd grad = qp.h * sol.x + qp.g;
  if (qp.b_eq.size() > 0) grad += qp.a_eq.transpose() * sol.y_eq;
  if (qp.b_in.size() > 0) {
    const Eigen::VectorXd slack = qp.a_in * sol.x - qp.b_in;
    res.primal = std::max(res.primal, slack.cwiseMax(0.0).maxCoeff());
    res.complementarity = sol.y_in.cwiseProduct(slack).cwiseAbs().maxCoeff();
    res.dual_sign = (-sol.y_in).cwiseMax(0.0).maxCoeff();
    grad += qp.a_in.transpose() * sol.y_in;
  }
  res.dual = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  return res;
}

QpSolution SolveQp(const QpSubproblem& qp, const QpOptions& options) {
  const int n = qp.num_variables();
  QpSolution bad;
  if (qp.h.rows() != n || qp.h.cols() != n || qp.a_eq.cols() != n ||
      qp.a_in.cols() != n || qp.a_eq.rows() != qp.b_eq.size() ||
      qp.a_in.rows() != qp.b_in.size() || !qp.h.allFinite() ||
      !qp.g.allFinite() || !qp.a_eq.allFinite() || !qp.b_eq.allFinite() ||
      !qp.a_in.allFinite() || !qp.b_in.allFinite()) {
    return bad;
  }
  if (n == 0) {
    QpSolution sol;
    sol.status = QpStatus::kOptimal;
    sol.y_eq = Eigen::VectorXd::Zero(qp.b_eq.size());
    sol.y_in = Eigen::VectorXd::Zero(qp.b_in.size());
    return sol;
  }
  const Eigen::MatrixXd h = 0.5 * (qp.h + qp.h.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  const double diag_scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
  bool definite = llt.info() == Eigen::Success;
  if (definite) {
    const Eigen::MatrixXd& lower = llt.matrixLLT();
    // Pivots this small leave the dual active-set updates inaccurate.
    definite =
        lower.diagonal().array().square().minCoeff() >= 1e-11 * diag_scale;
  }
  if (definite) {
    DualActiveSet solver(qp.g, qp.a_eq, qp.b_eq, qp.a_in, qp.b_in,
                         options.max_iterations);
    QpSolution sol = solver.Solve(llt);
    sol.objective = Objective(qp, sol.x);
    return sol;
  }

  // Proximal point: x+ = argmin f(x) + rho/2 |x - x_k|^2.
  const double rho = options.proximal_weight * diag_scale;
  const Eigen::MatrixXd hp = h + rho * Eigen::MatrixXd::Identity(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt_p(hp);
  if (llt_p.info() != Eigen::Success) return bad;
  Eigen::VectorXd xk = Eigen::VectorXd::Zero(n);
  QpSolution sol;
  int total = 0;
  for (int round = 0; round < options.max_proximal_rounds; ++round) {
    const Eigen::VectorXd gk = qp.g - rho * xk;
    DualActiveSet solver(gk, qp.a_eq, qp.b_eq, qp.a_in, qp.b_in,
                         options.max_iterations);
    sol = solver.Solve(llt_p);
    total += sol.iterations;
    if (sol.status != QpStatus::kOptimal) break;
    const double step = (sol.x - xk).lpNorm<Eigen::Infinity>();
    xk = sol.x;
    if (step <= 1e-13 * (1.0 + xk.lpNorm<Eigen::Infinity>())) break;
  }
  sol.iterations = total;
  sol.objective = Objective(qp, sol.x);
  return sol;
}

}  // namespace limitplan
