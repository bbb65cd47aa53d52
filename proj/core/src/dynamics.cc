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

#include "limitplan/dynamics.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "absl/strings/str_cat.h"

namespace limitplan {
namespace {

double RegularizedDenominator(double d) {
  return d >= 0.0 ? std::max(d, kSlipRegularizationSpeed)
                  : std::min(d, -kSlipRegularizationSpeed);
}

// Lever arm of each wheel in the vehicle frame.
struct WheelPosition {
  double x;
  double y;
};

std::array<WheelPosition, kNumWheels> WheelPositions(const VehicleParams& p) {
  return {{{p.l_front, p.half_track},
           {p.l_front, -p.half_track},
           {-p.l_rear, p.half_track},
           {-p.l_rear, -p.half_track}}};
}

absl::Status ReadChannel(const KeyValueConfig& config, const std::string& key,
                         MagicFormulaChannel* channel) {
  if (!config.Has(key)) return absl::OkStatus();
  auto values = config.GetDoubles(key);
  if (!values.ok()) return values.status();
  if (values->size() != 4) {
    return absl::InvalidArgumentError(
        absl::StrCat("key `", key, "` expects four values B C D E"));
  }
  channel->stiffness = (*values)[0];
  channel->shape = (*values)[1];
  channel->peak = (*values)[2];
  channel->curvature = (*values)[3];
  return absl::OkStatus();
}

absl::Status ValidateChannel(const MagicFormulaChannel& c,
                             const std::string& name) {
  if (!(c.stiffness > 0.0) || !(c.shape > 1.0) || !(c.shape < 2.0) ||
      !(c.peak > 0.5) || !(c.peak < 2.0) || !(c.curvature < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "tire channel ", name, " needs B > 0, 1 < C < 2, 0.5 < D < 2, E < 1"));
  }
  return absl::OkStatus();
}

}  // namespace

double MagicFormulaChannel::Evaluate(double s) const {
  const double bs = stiffness * s;
  return peak *
         std::sin(shape * std::atan(bs - curvature * (bs - std::atan(bs))));
}

double MagicFormulaChannel::PeakSlip() const {
  const double target = std::tan(std::numbers::pi / (2.0 * shape));
  if (curvature == 0.0) return target / stiffness;
  // Newton on B s - E (B s - atan(B s)) = target; monotone for E < 1.
  double s = target / stiffness;
  for (int i = 0; i < 30; ++i) {
    const double bs = stiffness * s;
    const double g = bs - curvature * (bs - std::atan(bs)) - target;
    const double dg =
        stiffness * (1.0 - curvature + curvature / (1.0 + bs * bs));
    const double next = std::max(s - g / dg, 0.5 * s);
    if (std::abs(next - s) < 1e-14 * std::max(1.0, s)) return next;
    s = next;
  }
  return s;
}

double VehicleParams::StaticLoad(bool front) const {
  const double axle_share = (front ? l_rear : l_front) / wheelbase();
  return 0.5 * mass * kGravity * axle_share;
}

absl::Status VehicleParams::Validate() const {
  const std::pair<const char*, double> positive[] = {
      {"mass", mass},
      {"inertia_roll", inertia_roll},
      {"inertia_pitch", inertia_pitch},
      {"inertia_yaw", inertia_yaw},
      {"wheel_inertia", wheel_inertia},
      {"l_front", l_front},
      {"l_rear", l_rear},
      {"half_track", half_track},
      {"wheel_radius", wheel_radius},
      {"suspension_stiffness", suspension_stiffness},
      {"com_height", com_height},
      {"half_width", half_width},
      {"delta_max", delta_max},
      {"delta_rate_max", delta_rate_max},
      {"steer_time_constant", steer_time_constant},
      {"torque_max", torque_max},
  };
  for (const auto& [name, value] : positive) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      return absl::InvalidArgumentError(
          absl::StrCat("vehicle parameter ", name, " must be positive"));
    }
  }
  if (suspension_damping < 0.0 || drag_coeff < 0.0 || rolling_coeff < 0.0) {
    return absl::InvalidArgumentError(
        "damping, drag and rolling coefficients must be non-negative");
  }
  if (!(mu > 0.0 && mu <= 1.5)) {
    return absl::InvalidArgumentError("mu must lie in (0, 1.5]");
  }
  if (!(torque_min < 0.0)) {
    return absl::InvalidArgumentError("torque_min must be negative");
  }
  for (const auto& [name, channel] :
       {std::pair{"front.long", tire.front.longitudinal},
        std::pair{"front.lat", tire.front.lateral},
        std::pair{"rear.long", tire.rear.longitudinal},
        std::pair{"rear.lat", tire.rear.lateral}}) {
    if (auto status = ValidateChannel(channel, name); !status.ok()) {
      return status;
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<VehicleParams> VehicleParams::FromConfig(
    const KeyValueConfig& config) {
  VehicleParams p;
  const std::map<std::string, double*> scalars = {
      {"mass", &p.mass},
      {"inertia_roll", &p.inertia_roll},
      {"inertia_pitch", &p.inertia_pitch},
      {"inertia_yaw", &p.inertia_yaw},
      {"wheel_inertia", &p.wheel_inertia},
      {"l_front", &p.l_front},
      {"l_rear", &p.l_rear},
      {"half_track", &p.half_track},
      {"wheel_radius", &p.wheel_radius},
      {"suspension_stiffness", &p.suspension_stiffness},
      {"suspension_damping", &p.suspension_damping},
      {"com_height", &p.com_height},
      {"mu", &p.mu},
      {"drag_coeff", &p.drag_coeff},
      {"rolling_coeff", &p.rolling_coeff},
      {"half_width", &p.half_width},
      {"delta_max", &p.delta_max},
      {"delta_rate_max", &p.delta_rate_max},
      {"steer_time_constant", &p.steer_time_constant},
      {"torque_min", &p.torque_min},
      {"torque_max", &p.torque_max},
  };
  const std::map<std::string, MagicFormulaChannel*> channels = {
      {"tire.front.long", &p.tire.front.longitudinal},
      {"tire.front.lat", &p.tire.front.lateral},
      {"tire.rear.long", &p.tire.rear.longitudinal},
      {"tire.rear.lat", &p.tire.rear.lateral},
  };
  for (const auto& [key, value] : config.entries()) {
    if (auto it = scalars.find(key); it != scalars.end()) {
      auto parsed = config.GetDouble(key);
      if (!parsed.ok()) return parsed.status();
      *it->second = *parsed;
    } else if (auto ct = channels.find(key); ct != channels.end()) {
      if (auto status = ReadChannel(config, key, ct->second); !status.ok()) {
        return status;
      }
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown vehicle parameter `", key, "`"));
    }
  }
  if (auto status = p.Validate(); !status.ok()) return status;
  return p;
}

absl::StatusOr<VehicleParams> VehicleParams::ReadFile(const std::string& path) {
  auto config = KeyValueConfig::ReadFile(path);
  if (!config.ok()) return config.status();
  return FromConfig(*config);
}

VehicleState::Vector VehicleState::ToVector() const {
  Vector v;
  v << x, y, psi, theta, phi, vx, vy, psi_dot, theta_dot, phi_dot, omega[0],
      omega[1], omega[2], omega[3], delta;
  return v;
}

VehicleState VehicleState::FromVector(const Vector& v) {
  VehicleState s;
  s.x = v[0];
  s.y = v[1];
  s.psi = v[2];
  s.theta = v[3];
  s.phi = v[4];
  s.vx = v[5];
  s.vy = v[6];
  s.psi_dot = v[7];
  s.theta_dot = v[8];
  s.phi_dot = v[9];
  for (int i = 0; i < kNumWheels; ++i) s.omega[i] = v[10 + i];
  s.delta = v[14];
  return s;
}

double SlipRatio(double wheel_radius, double omega, double vx_wheel) {
  const double rim_speed = wheel_radius * omega;
  const double numerator = rim_speed - vx_wheel;
  double ratio = 0.0;
  if (rim_speed >= vx_wheel) {
    ratio = numerator / std::max(std::abs(rim_speed), kSlipRegularizationSpeed);
  } else {
    ratio = numerator / std::max(std::abs(vx_wheel), kSlipRegularizationSpeed);
  }
  return std::clamp(ratio, -1.0, 1.0);
}

std::array<double, kNumWheels> SlipAngles(const VehicleState& state,
                                          const VehicleParams& params) {
  std::array<double, kNumWheels> alpha{};
  const double yaw_track = params.half_track * state.psi_dot;
  for (int i = 0; i < kNumWheels; ++i) {
    const double denominator = RegularizedDenominator(
        IsLeft(i) ? state.vx - yaw_track : state.vx + yaw_track);
    if (IsFront(i)) {
      alpha[i] = state.delta -
                 (state.vy + params.l_front * state.psi_dot) / denominator;
    } else {
      alpha[i] = -(state.vy - params.l_rear * state.psi_dot) / denominator;
    }
  }
  return alpha;
}

TireForce TireForces(double slip_ratio, double slip_angle, double fz, double mu,
                     const AxleTire& tire) {
  if (!(fz > 0.0)) return {};
  const double peak_long = tire.longitudinal.PeakSlip();
  const double peak_lat = tire.lateral.PeakSlip();
  const double nx = slip_ratio / peak_long;
  const double ny = slip_angle / peak_lat;
  const double rho = std::hypot(nx, ny);
  if (rho < 1e-12) return {};
  const double capacity = mu * fz;
  // Evaluate with D stripped, then apply the friction-ellipse semi-axes.
  auto normalized = [rho](const MagicFormulaChannel& c, double peak_slip) {
    MagicFormulaChannel unit = c;
    unit.peak = 1.0;
    return unit.Evaluate(rho * peak_slip);
  };
  const double semi_long = capacity * std::min(tire.longitudinal.peak, 1.0);
  const double semi_lat = capacity * std::min(tire.lateral.peak, 1.0);
  return {semi_long * normalized(tire.longitudinal, peak_long) * nx / rho,
          semi_lat * normalized(tire.lateral, peak_lat) * ny / rho};
}

std::array<double, kNumWheels> NormalLoads(const VehicleState& state,
                                           const VehicleParams& params) {
  std::array<double, kNumWheels> fz{};
  for (int i = 0; i < kNumWheels; ++i) {
    const double pitch_arm = IsFront(i) ? -params.l_front : params.l_rear;
    const double roll_arm = IsLeft(i) ? params.half_track : -params.half_track;
    const double deflection = pitch_arm * state.phi + roll_arm * state.theta;
    const double deflection_rate =
        pitch_arm * state.phi_dot + roll_arm * state.theta_dot;
    fz[i] = std::max(0.0, params.StaticLoad(IsFront(i)) -
                              params.suspension_stiffness * deflection -
                              params.suspension_damping * deflection_rate);
  }
  return fz;
}

TireState ComputeTireState(const VehicleState& state,
                           const VehicleParams& params) {
  TireState tires;
  const auto loads = NormalLoads(state, params);
  const auto alpha = SlipAngles(state, params);
  const auto positions = WheelPositions(params);
  const double cos_delta = std::cos(state.delta);
  const double sin_delta = std::sin(state.delta);
  for (int i = 0; i < kNumWheels; ++i) {
    WheelTireState& w = tires[i];
    const double vx_contact = state.vx - state.psi_dot * positions[i].y;
    const double vy_contact = state.vy + state.psi_dot * positions[i].x;
    const bool front = IsFront(i);
    w.vx_wheel =
        front ? vx_contact * cos_delta + vy_contact * sin_delta : vx_contact;
    w.fz = loads[i];
    w.slip_ratio = SlipRatio(params.wheel_radius, state.omega[i], w.vx_wheel);
    w.slip_angle = alpha[i];
    const TireForce f =
        TireForces(w.slip_ratio, w.slip_angle, w.fz, params.mu,
                   front ? params.tire.front : params.tire.rear);
    w.fx_wheel = f.longitudinal;
    w.fy_wheel = f.lateral;
    if (front) {
      w.fx = f.longitudinal * cos_delta - f.lateral * sin_delta;
      w.fy = f.longitudinal * sin_delta + f.lateral * cos_delta;
    } else {
      w.fx = f.longitudinal;
      w.fy = f.lateral;
    }
  }
  return tires;
}

namespace {

double AeroForce(const VehicleState& state, const VehicleParams& params) {
  return params.drag_coeff * state.vx * std::abs(state.vx);
}

}  // namespace

BodyAcceleration ComputeBodyAcceleration(const VehicleState& state,
                                         const VehicleParams& params) {
  const TireState t = ComputeTireState(state, params);
  const double sum_fx = t[0].fx + t[1].fx + t[2].fx + t[3].fx;
  const double sum_fy = t[0].fy + t[1].fy + t[2].fy + t[3].fy;
  BodyAcceleration a;
  a.longitudinal = (sum_fx - AeroForce(state, params)) / params.mass;
  a.lateral = sum_fy / params.mass;
  a.yaw = (params.l_front * (t[0].fy + t[1].fy) -
           params.l_rear * (t[2].fy + t[3].fy) +
           params.half_track * (t[1].fx + t[3].fx - t[0].fx - t[2].fx)) /
          params.inertia_yaw;
  return a;
}

VehicleState::Vector StateDerivative(const VehicleState& state,
                                     const ControlInput& input,
                                     const VehicleParams& params) {
  const TireState t = ComputeTireState(state, params);
  const double sum_fx = t[0].fx + t[1].fx + t[2].fx + t[3].fx;
  const double sum_fy = t[0].fy + t[1].fy + t[2].fy + t[3].fy;
  const double cos_psi = std::cos(state.psi);
  const double sin_psi = std::sin(state.psi);

  VehicleState::Vector d;
  d[0] = state.vx * cos_psi - state.vy * sin_psi;
  d[1] = state.vx * sin_psi + state.vy * cos_psi;
  d[2] = state.psi_dot;
  d[3] = state.theta_dot;
  d[4] = state.phi_dot;
  d[5] = state.psi_dot * state.vy +
         (sum_fx - AeroForce(state, params)) / params.mass;
  d[6] = -state.psi_dot * state.vx + sum_fy / params.mass;
  d[7] = (params.l_front * (t[0].fy + t[1].fy) -
          params.l_rear * (t[2].fy + t[3].fy) +
          params.half_track * (t[1].fx + t[3].fx - t[0].fx - t[2].fx)) /
         params.inertia_yaw;
  d[8] = (params.half_track * (t[0].fz + t[2].fz - t[1].fz - t[3].fz) +
          params.com_height * sum_fy) /
         params.inertia_roll;
  d[9] = (params.l_rear * (t[2].fz + t[3].fz) -
          params.l_front * (t[0].fz + t[1].fz) - params.com_height * sum_fx) /
         params.inertia_pitch;
  for (int i = 0; i < kNumWheels; ++i) {
    const double rolling = -params.rolling_coeff * t[i].fz *
                           params.wheel_radius *
                           std::tanh(params.wheel_radius * state.omega[i] /
                                     kSlipRegularizationSpeed);
    d[10 + i] =
        (input.torque[i] + rolling - params.wheel_radius * t[i].fx_wheel) /
        params.wheel_inertia;
  }
  const double target =
      std::clamp(input.delta_cmd, -params.delta_max, params.delta_max);
  // Smooth first-order lag whose rate saturates at delta_rate_max.
  d[14] = params.delta_rate_max *
          std::tanh((target - state.delta) /
                    (params.delta_rate_max * params.steer_time_constant));
  return d;
}

absl::StatusOr<VehicleState> Step(const VehicleState& state,
                                  const ControlInput& input,
                                  const VehicleParams& params, double dt) {
  if (!(dt > 0.0 && dt <= kMaxPlantStep)) {
    return absl::InvalidArgumentError(
        absl::StrCat("plant step ", dt, " s outside (0, ", kMaxPlantStep, "]"));
  }
  const VehicleState::Vector x0 = state.ToVector();
  auto f = [&](const VehicleState::Vector& x) {
    return StateDerivative(VehicleState::FromVector(x), input, params);
  };
  const VehicleState::Vector k1 = f(x0);
  const VehicleState::Vector k2 = f(x0 + 0.5 * dt * k1);
  const VehicleState::Vector k3 = f(x0 + 0.5 * dt * k2);
  const VehicleState::Vector k4 = f(x0 + dt * k3);
  return VehicleState::FromVector(x0 +
                                  (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

VehicleState TrimmedState(const VehicleParams& params, double vx, double vy,
                          double delta) {
  VehicleState s;
  s.vx = vx;
  s.vy = vy;
  s.delta = delta;
  const double front_speed = vx * std::cos(delta) + vy * std::sin(delta);
  for (int i = 0; i < kNumWheels; ++i) {
    s.omega[i] = (IsFront(i) ? front_speed : vx) / params.wheel_radius;
  }
  return s;
}

}  // namespace limitplan
