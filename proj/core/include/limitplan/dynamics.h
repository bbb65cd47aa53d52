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

// Nine degree-of-freedom vehicle model: planar body motion, roll, pitch and
// four wheel spins, with suspension load transfer and combined-slip tires.
//
// Wheel indices: 0 = front-left, 1 = front-right, 2 = rear-left,
// 3 = rear-right. Vehicle frame: x forward, y left, yaw counter-clockwise.

#ifndef LIMITPLAN_DYNAMICS_H_
#define LIMITPLAN_DYNAMICS_H_

#include <array>
#include <string>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "limitplan/config.h"

namespace limitplan {

inline constexpr double kGravity = 9.81;
inline constexpr int kNumWheels = 4;

// Speed below which slip denominators are clamped (m/s).
inline constexpr double kSlipRegularizationSpeed = 0.5;
// Largest plant integration step (s).
inline constexpr double kMaxPlantStep = 2e-3;

constexpr bool IsFront(int wheel) { return wheel < 2; }
constexpr bool IsLeft(int wheel) { return wheel % 2 == 0; }

// One Magic Formula channel: D * sin(C * atan(B s - E (B s - atan(B s)))).
struct MagicFormulaChannel {
  double stiffness = 10.0;  // B
  double shape = 1.5;       // C, must exceed 1 so the curve has a peak
  double peak = 1.0;        // D, peak force per unit mu * F_z
  double curvature = 0.0;   // E

  // Normalized force (units of mu * F_z) at slip `s`.
  double Evaluate(double s) const;
  // Positive slip at which Evaluate peaks.
  double PeakSlip() const;
};

struct AxleTire {
  MagicFormulaChannel longitudinal;
  MagicFormulaChannel lateral;
};

struct TireParams {
  AxleTire front;
  AxleTire rear;
};

struct VehicleParams {
  double mass = 1500.0;                   // M_T (kg)
  double inertia_roll = 600.0;            // I_x (kg m^2)
  double inertia_pitch = 2500.0;          // I_y
  double inertia_yaw = 2600.0;            // I_z
  double wheel_inertia = 1.2;             // I_r
  double l_front = 1.3;                   // CoM to front axle (m)
  double l_rear = 1.3;                    // CoM to rear axle (m)
  double half_track = 0.8;                // l_w (m)
  double wheel_radius = 0.3;              // r_w (m)
  double suspension_stiffness = 35000.0;  // k_s (N/m)
  double suspension_damping = 3500.0;     // d_s (N s/m)
  double com_height = 0.55;               // Z (m)
  double mu = 1.0;
  double drag_coeff = 0.4;            // F_aero = drag_coeff * V_x^2 (N)
  double rolling_coeff = 0.012;       // rolling resistance per unit F_z
  double half_width = 0.9;            // body half width (m), for clearance
  double delta_max = 0.5;             // steering angle bound (rad)
  double delta_rate_max = 12.0;       // steering rate limit (rad/s)
  double steer_time_constant = 0.02;  // steering actuator lag (s)
  double torque_min = -1500.0;        // per-wheel torque bounds (N m)
  double torque_max = 520.0;
  TireParams tire;

  double wheelbase() const { return l_front + l_rear; }
  // Static normal load on one wheel of the given axle.
  double StaticLoad(bool front) const;

  absl::Status Validate() const;

  static absl::StatusOr<VehicleParams> FromConfig(const KeyValueConfig& config);
  static absl::StatusOr<VehicleParams> ReadFile(const std::string& path);
};

struct VehicleState {
  double x = 0.0;      // X, ground frame (m)
  double y = 0.0;      // Y
  double psi = 0.0;    // yaw (rad)
  double theta = 0.0;  // roll
  double phi = 0.0;    // pitch, positive nose-down
  double vx = 0.0;     // body-frame velocities (m/s)
  double vy = 0.0;
  double psi_dot = 0.0;
  double theta_dot = 0.0;
  double phi_dot = 0.0;
  std::array<double, kNumWheels> omega{};  // wheel spin (rad/s)
  double delta = 0.0;                      // front steering angle (rad)

  static constexpr int kSize = 15;
  using Vector = Eigen::Matrix<double, kSize, 1>;
  Vector ToVector() const;
  static VehicleState FromVector(const Vector& v);
};

struct ControlInput {
  std::array<double, kNumWheels> torque{};  // T_w (N m)
  double delta_cmd = 0.0;                   // rad
};

struct WheelTireState {
  double slip_ratio = 0.0;  // tau
  double slip_angle = 0.0;  // alpha (rad)
  double fx_wheel = 0.0;    // wheel frame (N)
  double fy_wheel = 0.0;
  double fx = 0.0;  // vehicle frame (N)
  double fy = 0.0;
  double fz = 0.0;
  double vx_wheel = 0.0;  // wheel-frame longitudinal speed (m/s)
};

using TireState = std::array<WheelTireState, kNumWheels>;

struct TireForce {
  double longitudinal = 0.0;
  double lateral = 0.0;
};

// Slip ratio with both denominators clamped below kSlipRegularizationSpeed,
// saturated to [-1, 1].
double SlipRatio(double wheel_radius, double omega, double vx_wheel);

// Small-angle side-slip of every wheel.
std::array<double, kNumWheels> SlipAngles(const VehicleState& state,
                                          const VehicleParams& params);

// Combined-slip forces in the wheel frame. Each channel is a Magic Formula in
// its own slip; combined slip evaluates both channels at the common
// normalized slip magnitude so the result stays inside the friction ellipse
// with semi-axes min(D, 1) * mu * F_z.
TireForce TireForces(double slip_ratio, double slip_angle, double fz, double mu,
                     const AxleTire& tire);

// Normal loads from static distribution plus suspension spring/damper
// response to roll and pitch. Clamped at zero (lift-off).
std::array<double, kNumWheels> NormalLoads(const VehicleState& state,
                                           const VehicleParams& params);

TireState ComputeTireState(const VehicleState& state,
                           const VehicleParams& params);

// Body-frame acceleration of the centre of mass, sum of external forces over
// mass (m/s^2), and yaw acceleration.
struct BodyAcceleration {
  double longitudinal = 0.0;
  double lateral = 0.0;
  double yaw = 0.0;
};

BodyAcceleration ComputeBodyAcceleration(const VehicleState& state,
                                         const VehicleParams& params);

VehicleState::Vector StateDerivative(const VehicleState& state,
                                     const ControlInput& input,
                                     const VehicleParams& params);

// Classic fourth-order Runge-Kutta step; `dt` must lie in (0, kMaxPlantStep].
absl::StatusOr<VehicleState> Step(const VehicleState& state,
                                  const ControlInput& input,
                                  const VehicleParams& params, double dt);

// Free-rolling state at the given body velocities: wheels spin at the
// speed of their contact patch, suspension at rest.
VehicleState TrimmedState(const VehicleParams& params, double vx, double vy,
                          double delta);

}  // namespace limitplan

#endif  // LIMITPLAN_DYNAMICS_H_
