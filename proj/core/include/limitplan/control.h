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

// Low-level tracking of a planned trajectory: PID on speed producing wheel
// torque, PID on the look-ahead lateral offset producing a steering command.

#ifndef LIMITPLAN_CONTROL_H_
#define LIMITPLAN_CONTROL_H_

#include "absl/status/statusor.h"
#include "limitplan/config.h"
#include "limitplan/dynamics.h"
#include "limitplan/planner.h"

namespace limitplan {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integral_limit = 1.0;  // clamp on the integrated error
};

struct ControllerConfig {
  // Speed loop output is an acceleration (m/s^2) per m/s of error.
  PidGains longitudinal{1.5, 0.3, 0.0, 5.0};
  // Steering (rad) per m of look-ahead lateral offset.
  PidGains lateral{0.12, 0.02, 0.02, 2.0};
  double tau = 0.2;              // look-ahead (s)
  double delta_rate_max = 12.0;  // rad/s
  double dt = 0.01;              // control period (s)
  double stale_after = 0.2;      // plan age that triggers hold (s)
  // Use cos for both look-ahead coordinates instead of sin for Y.
  bool literal_lookahead = false;

  absl::Status Validate() const;
  // Reads `control.*` keys; gains as "kp ki kd integral_limit".
  static absl::StatusOr<ControllerConfig> FromConfig(
      const KeyValueConfig& config);
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
};

// psi_hat = psi + tau psi_dot / 2, then a straight advance of tau v_x along
// psi_hat.
Pose LookaheadPose(const VehicleState& state, double tau,
                   bool literal_cos = false);

class PidController {
 public:
  explicit PidController(PidGains gains) : gains_(gains) {}
  double Update(double error, double dt);
  void Reset();

 private:
  PidGains gains_;
  double integral_ = 0.0;
  double previous_error_ = 0.0;
  bool primed_ = false;
};

struct TrackingCommand {
  ControlInput input;
  bool stale = false;
  double v_target = 0.0;
  double lateral_error = 0.0;  // look-ahead offset to the plan target (m)
};

class TrackingController {
 public:
  TrackingController(const VehicleParams& params, ControllerConfig config);

  // `plan_age` is the time since the plan's first node.
  TrackingCommand Track(const VehicleState& state, const MpcSolution& plan,
                        double plan_age);

  // Command when no plan is available: hold the last one.
  TrackingCommand Hold() const;

  void Reset();
  const ControllerConfig& config() const { return config_; }

 private:
  VehicleParams params_;
  ControllerConfig config_;
  PidController speed_pid_;
  PidController lateral_pid_;
  ControlInput last_;
};

}  // namespace limitplan

#endif  // LIMITPLAN_CONTROL_H_
