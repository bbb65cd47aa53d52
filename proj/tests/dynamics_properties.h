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

// Plant maneuvers whose measured properties are asserted by the unit tests
// and reported by the acceptance binary.

#ifndef LIMITPLAN_TESTS_DYNAMICS_PROPERTIES_H_
#define LIMITPLAN_TESTS_DYNAMICS_PROPERTIES_H_

#include <algorithm>
#include <cmath>

#include "limitplan/dynamics.h"

namespace limitplan::properties {

inline VehicleState Simulate(const VehicleState& start,
                             const ControlInput& input,
                             const VehicleParams& params, double duration,
                             double dt) {
  VehicleState s = start;
  const int steps = static_cast<int>(std::lround(duration / dt));
  for (int i = 0; i < steps; ++i) s = *Step(s, input, params, dt);
  return s;
}

// Mild accelerating left turn from 15 m/s.
inline ControlInput Maneuver() {
  ControlInput in;
  in.torque = {150.0, 150.0, 150.0, 150.0};
  in.delta_cmd = 0.04;
  return in;
}

struct OrderResult {
  double error_coarse = 0.0;  // dt = 2 ms
  double error_fine = 0.0;    // dt = 1 ms
  double order() const { return std::log2(error_coarse / error_fine); }
};

// Position error after 1 s against a 0.125 ms reference.
inline OrderResult ConvergenceOrder(const VehicleParams& p) {
  const VehicleState start = TrimmedState(p, 15.0, 0.0, 0.0);
  const ControlInput in = Maneuver();
  const VehicleState ref = Simulate(start, in, p, 1.0, 1.25e-4);
  auto error = [&](double dt) {
    const VehicleState s = Simulate(start, in, p, 1.0, dt);
    return std::hypot(s.x - ref.x, s.y - ref.y);
  };
  return {error(2e-3), error(1e-3)};
}

struct MirrorResult {
  VehicleState left;
  VehicleState right;
  double max_error() const {
    return std::max({std::abs(left.x - right.x), std::abs(left.y + right.y),
                     std::abs(left.psi + right.psi),
                     std::abs(left.theta + right.theta)});
  }
};

inline MirrorResult MirroredManeuver(const VehicleParams& p) {
  const VehicleState start = TrimmedState(p, 15.0, 0.0, 0.0);
  ControlInput left = Maneuver();
  ControlInput right = left;
  right.delta_cmd = -left.delta_cmd;
  return {Simulate(start, left, p, 1.0, 1e-3),
          Simulate(start, right, p, 1.0, 1e-3)};
}

struct CoastResult {
  double max_vy = 0.0;
  double max_yaw_rate = 0.0;
  double final_vx = 0.0;
};

// 5 s from 20 m/s with zero torque and steering.
inline CoastResult Coast(const VehicleParams& p) {
  CoastResult r;
  VehicleState s = TrimmedState(p, 20.0, 0.0, 0.0);
  for (int i = 0; i < 5000; ++i) {
    s = *Step(s, ControlInput{}, p, 1e-3);
    r.max_vy = std::max(r.max_vy, std::abs(s.vy));
    r.max_yaw_rate = std::max(r.max_yaw_rate, std::abs(s.psi_dot));
  }
  r.final_vx = s.vx;
  return r;
}

struct ForceResult {
  double max_friction_ratio = 0.0;  // |F_w| / (mu F_z)
  double min_fz = 0.0;
  double max_load_error = 0.0;  // |sum F_z - M g| / (M g), quasi-static only
  int quasi_static_samples = 0;
};

// Full drive, full brake, mixed torques and a coast, each 2 s from
// 18 m/s with some sideslip.
inline ForceResult ForcesDuringManeuvers(const VehicleParams& p) {
  const ControlInput inputs[] = {{{520.0, 520.0, 520.0, 520.0}, 0.3},
                                 {{-1500.0, -1500.0, -1500.0, -1500.0}, -0.2},
                                 {{-800.0, 300.0, 520.0, -1500.0}, 0.5},
                                 {{0.0, 0.0, 0.0, 0.0}, 0.1}};
  ForceResult r;
  r.min_fz = 1e300;
  const double weight = p.mass * kGravity;
  for (const ControlInput& in : inputs) {
    VehicleState s = TrimmedState(p, 18.0, 0.5, 0.0);
    for (int i = 0; i < 2000; ++i) {
      const auto tires = ComputeTireState(s, p);
      double sum = 0.0;
      for (const WheelTireState& w : tires) {
        if (w.fz > 0.0) {
          r.max_friction_ratio =
              std::max(r.max_friction_ratio,
                       std::hypot(w.fx_wheel, w.fy_wheel) / (p.mu * w.fz));
        }
        r.min_fz = std::min(r.min_fz, w.fz);
        sum += w.fz;
      }
      const VehicleState ds =
          VehicleState::FromVector(StateDerivative(s, in, p));
      if (std::abs(ds.theta_dot) < 0.1 && std::abs(ds.phi_dot) < 0.1) {
        r.max_load_error =
            std::max(r.max_load_error, std::abs(sum - weight) / weight);
        ++r.quasi_static_samples;
      }
      s = *Step(s, in, p, 1e-3);
    }
  }
  return r;
}

}  // namespace limitplan::properties

#endif  // LIMITPLAN_TESTS_DYNAMICS_PROPERTIES_H_
