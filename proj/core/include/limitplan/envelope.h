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

// Offline identification of the set of accelerations the vehicle can
// produce. Random constant inputs are applied to the full plant for a short
// window; the resulting (a_X, a_Y) hulls are then approximated by an
// ellipse, a speed-dependent longitudinal box and a symmetric pair of
// half-planes, and yaw acceleration is tied to lateral acceleration by a
// single slope gamma.

#ifndef LIMITPLAN_ENVELOPE_H_
#define LIMITPLAN_ENVELOPE_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "limitplan/config.h"
#include "limitplan/dynamics.h"

namespace limitplan {

struct AccelSample {
  double vx0 = 0.0;   // m/s
  double vy0 = 0.0;   // m/s
  double ax = 0.0;    // body-frame longitudinal acceleration (m/s^2)
  double ay = 0.0;    // body-frame lateral acceleration (m/s^2)
  double apsi = 0.0;  // yaw acceleration (rad/s^2)

  friend bool operator==(const AccelSample&, const AccelSample&) = default;
};

struct SamplingOptions {
  int n_samples = 5000;
  std::uint64_t seed = 1;
  double horizon = 0.1;       // s
  double dt = 1e-3;           // s
  double lateral_band = 0.2;  // |v_y0| <= band * v_x0
  // Fraction of samples that apply one torque to all four wheels; the rest
  // draw every wheel independently.
  double common_torque_fraction = 0.5;
  int threads = 0;  // 0 = hardware concurrency
};

struct SamplingReport {
  std::vector<AccelSample> samples;
  int rejected = 0;
  double rejection_rate() const {
    const int total = static_cast<int>(samples.size()) + rejected;
    return total == 0 ? 0.0 : static_cast<double>(rejected) / total;
  }
};

absl::StatusOr<SamplingReport> SampleEnvelope(const VehicleParams& params,
                                              double vx0,
                                              const SamplingOptions& options);

// Outcome of one sample; nullopt-like `ok = false` when the integration
// diverged. Exposed for tests.
struct SampleOutcome {
  AccelSample sample;
  bool ok = false;
};
SampleOutcome SimulateSample(const VehicleParams& params, double vx0,
                             double vy0, double delta,
                             const std::array<double, kNumWheels>& torque,
                             double horizon, double dt);

struct EnvelopeFit {
  double alpha = 9.4;  // longitudinal ellipse semi-axis (m/s^2)
  double beta = 9.0;   // lateral ellipse semi-axis (m/s^2)
  // Rows are half-plane normals in (a_X, a_Y): A u <= b.
  Eigen::Matrix2d a{{2.6, 1.0}, {2.6, -1.0}};
  Eigen::Vector2d b{15.3, 15.3};
  std::array<double, 3> ax_min_poly{-9.3, -0.013, 0.00072};
  std::array<double, 2> ax_max_poly{4.3, -0.009};
  double gamma = 0.56;  // rad/m

  double AxMin(double vx0) const;
  double AxMax(double vx0) const;

  // Scales the (a_X, a_Y) region about the origin.
  EnvelopeFit Scaled(double factor) const;

  KeyValueConfig ToConfig() const;
  static absl::StatusOr<EnvelopeFit> FromConfig(const KeyValueConfig& config);
  static absl::StatusOr<EnvelopeFit> ReadFile(const std::string& path);
  absl::Status WriteFile(const std::string& path) const;
};

// Inequalities are tested with tolerance `tolerance`; the yaw coupling
// |u_psi - gamma u_y| is always held to 1e-9.
bool CheckMembership(const EnvelopeFit& fit, double vx0, double ux, double uy,
                     double upsi, double tolerance = 0.0);

// Distance from the origin to the boundary of the fitted (a_X, a_Y) region
// at speed vx0 along the unit direction (dx, dy).
double RegionRadius(const EnvelopeFit& fit, double vx0, double dx, double dy);

using Point2 = Eigen::Vector2d;

// Counter-clockwise convex hull without collinear points.
std::vector<Point2> ConvexHull(std::vector<Point2> points);
double PolygonArea(std::span<const Point2> ccw_polygon);
Point2 PolygonCentroid(std::span<const Point2> ccw_polygon);
bool PolygonContains(std::span<const Point2> ccw_polygon, const Point2& p,
                     double tolerance = 1e-12);
// Ray from `origin` (inside the polygon) along unit `direction`; returns the
// exit distance.
double PolygonRayExit(std::span<const Point2> ccw_polygon, const Point2& origin,
                      const Point2& direction);
// Scales the polygon about its centroid.
std::vector<Point2> DilatePolygon(std::span<const Point2> ccw_polygon,
                                  double factor);

struct SpeedGroup {
  double vx0 = 0.0;
  std::vector<Point2> hull;     // (a_X, a_Y)
  std::vector<Point2> dilated;  // hull scaled 1.05 about its centroid
};

struct FitReport {
  EnvelopeFit fit;
  std::vector<SpeedGroup> groups;
  double shrink_factor = 1.0;  // uniform scale applied for containment
  // RMS(apsi - gamma ay) / RMS(apsi) over the gamma fitting samples.
  double gamma_residual_ratio = 0.0;
};

inline constexpr double kHullDilation = 1.05;
// gamma is fitted on samples with |v_y0| <= band * v_x0.
inline constexpr double kGammaFitSideslipBand = 0.05;

absl::StatusOr<FitReport> FitEnvelope(std::span<const AccelSample> samples);

// Boundary of the fitted region at `vx0` sampled every `step_deg` degrees.
std::vector<Point2> PolytopizeRegion(const EnvelopeFit& fit, double vx0,
                                     double step_deg = 1.0);

absl::Status WriteSamplesCsv(const std::string& path,
                             std::span<const AccelSample> samples);
absl::StatusOr<std::vector<AccelSample>> ReadSamplesCsv(
    const std::string& path);

}  // namespace limitplan

#endif  // LIMITPLAN_ENVELOPE_H_
