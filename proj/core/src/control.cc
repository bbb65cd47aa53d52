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

#include "limitplan/control.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace limitplan {
namespace {

absl::StatusOr<PidGains> ReadGains(const KeyValueConfig& config,
                                   const char* key, PidGains fallback) {
  if (!config.Has(key)) return fallback;
  auto values = config.GetDoubles(key);
  if (!values.ok()) return values.status();
  if (values->size() != 3 && values->size() != 4) {
    return absl::InvalidArgumentError(
        absl::StrCat(key, ": expected kp ki kd [integral_limit]"));
  }
  PidGains g{(*values)[0], (*values)[1], (*values)[2], fallback.integral_limit};
  if (values->size() == 4) g.integral_limit = (*values)[3];
  return g;
}

// Signed curvature of the circle through three points.
double MengerCurvature(const PlannerState& a, const PlannerState& b,
                       const PlannerState& c) {
  const double abx = b.x - a.x, aby = b.y - a.y;
  const double bcx = c.x - b.x, bcy = c.y - b.y;
  const double acx = c.x - a.x, acy = c.y - a.y;
  const double denom =
      std::hypot(abx, aby) * std::hypot(bcx, bcy) * std::hypot(acx, acy);
  if (denom < 1e-9) return 0.0;
  return 2.0 * (abx * bcy - aby * bcx) / denom;
}

}  // namespace

absl::Status ControllerConfig::Validate() const {
  for (const PidGains* g : {&longitudinal, &lateral}) {
    if (g->kp < 0.0 || g->ki < 0.0 || g->kd < 0.0 || g->integral_limit < 0.0) {
      return absl::InvalidArgumentError("controller gains must be >= 0");
    }
  }
  if (!(tau > 0.0) || !(delta_rate_max > 0.0) || !(dt > 0.0) ||
      !(stale_after > 0.0)) {
    return absl::InvalidArgumentError(
        "tau, delta_rate_max, dt and stale_after must be positive");
  }
  return absl::OkStatus();
}

absl::StatusOr<ControllerConfig> ControllerConfig::FromConfig(
    const KeyValueConfig& config) {
  ControllerConfig c;
  auto lon = ReadGains(config, "control.longitudinal", c.longitudinal);
  if (!lon.ok()) return lon.status();
  c.longitudinal = *lon;
  auto lat = ReadGains(config, "control.lateral", c.lateral);
  if (!lat.ok()) return lat.status();
  c.lateral = *lat;
  absl::Status status;
  status.Update(config.Read("control.tau", &c.tau));
  status.Update(config.Read("control.delta_rate_max", &c.delta_rate_max));
  status.Update(config.Read("control.dt", &c.dt));
  status.Update(config.Read("control.stale_after", &c.stale_after));
  status.Update(config.Read("control.literal_lookahead", &c.literal_lookahead));
  if (!status.ok()) return status;
  if (auto s = c.Validate(); !s.ok()) return s;
  return c;
}

Pose LookaheadPose(const VehicleState& state, double tau, bool literal_cos) {
  Pose p;
  p.psi = state.psi + 0.5 * tau * state.psi_dot;
  const double advance = tau * state.vx;
  p.x = state.x + advance * std::cos(p.psi);
  p.y = state.y + advance * (literal_cos ? std::cos(p.psi) : std::sin(p.psi));
  return p;
}

double PidController::Update(double error, double dt) {
  integral_ = std::clamp(integral_ + error * dt, -gains_.integral_limit,
                         gains_.integral_limit);
  const double derivative = primed_ ? (error - previous_error_) / dt : 0.0;
  previous_error_ = error;
  primed_ = true;
  return gains_.kp * error + gains_.ki * integral_ + gains_.kd * derivative;
}

void PidController::Reset() {
  integral_ = 0.0;
  previous_error_ = 0.0;
  primed_ = false;
}

TrackingController::TrackingController(const VehicleParams& params,
                                       ControllerConfig config)
    : params_(params),
      config_(config),
      speed_pid_(config.longitudinal),
      lateral_pid_(config.lateral) {}

void TrackingController::Reset() {
  speed_pid_.Reset();
  lateral_pid_.Reset();
  last_ = ControlInput{};
}

TrackingCommand TrackingController::Hold() const {
  TrackingCommand cmd;
  cmd.input = last_;
  cmd.stale = true;
  return cmd;
}

TrackingCommand TrackingController::Track(const VehicleState& state,
                                          const MpcSolution& plan,
                                          double plan_age) {
  if (plan.states.empty() || plan_age > config_.stale_after + 1e-9) {
    return Hold();
  }
  TrackingCommand cmd;
  const double dt = config_.dt;

  // Longitudinal: feedforward plan acceleration, drag and rolling
  // resistance, plus PID on speed.
  const PlannerState now = plan.StateAt(plan_age);
  cmd.v_target = now.vx;
  const int k = std::clamp(static_cast<int>(plan_age / plan.h), 0,
                           static_cast<int>(plan.controls.size()) - 1);
  const double a_plan = plan.controls.empty() ? 0.0 : plan.controls[k](0);
  const double a_cmd = a_plan + speed_pid_.Update(cmd.v_target - state.vx, dt);
  const double force = params_.mass * a_cmd +
                       params_.drag_coeff * state.vx * std::abs(state.vx) +
                       params_.rolling_coeff * params_.mass * kGravity;
  // Drive torque is shared equally. Braking follows the axle loads under the
  // commanded deceleration so the rear wheels do not lock first.
  double front_share = 0.5;
  if (force < 0.0) {
    front_share =
        std::clamp((params_.l_rear +
                    params_.com_height * std::max(0.0, -a_cmd) / kGravity) /
                       params_.wheelbase(),
                   0.0, 1.0);
  }
  const double front =
      std::clamp(force * front_share * params_.wheel_radius / 2.0,
                 params_.torque_min, params_.torque_max);
  const double rear =
      std::clamp(force * (1.0 - front_share) * params_.wheel_radius / 2.0,
                 params_.torque_min, params_.torque_max);
  cmd.input.torque = {front, front, rear, rear};

  // Lateral: offset of the plan target at t + tau from the look-ahead pose,
  // measured along the left normal of the predicted heading.
  const Pose pose =
      LookaheadPose(state, config_.tau, config_.literal_lookahead);
  const double t_ahead = plan_age + config_.tau;
  const PlannerState target = plan.StateAt(t_ahead);
  cmd.lateral_error = -std::sin(pose.psi) * (target.x - pose.x) +
                      std::cos(pose.psi) * (target.y - pose.y);
  const double curvature = MengerCurvature(
      plan.StateAt(t_ahead - plan.h), target, plan.StateAt(t_ahead + plan.h));
  const double feedforward = std::atan(params_.wheelbase() * curvature);
  double delta = feedforward + lateral_pid_.Update(cmd.lateral_error, dt);
  delta = std::clamp(delta, -params_.delta_max, params_.delta_max);
  const double max_change = config_.delta_rate_max * dt;
  delta = std::clamp(delta, last_.delta_cmd - max_change,
                     last_.delta_cmd + max_change);
  cmd.input.delta_cmd = delta;
  last_ = cmd.input;
  return cmd;
}

}  // namespace limitplan
