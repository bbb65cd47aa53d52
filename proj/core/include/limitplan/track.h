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

// Reference path construction, local polynomial windows and obstacle
// constraints.

#ifndef LIMITPLAN_TRACK_H_
#define LIMITPLAN_TRACK_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "limitplan/config.h"

namespace limitplan {

inline constexpr double kPathSpacing = 0.25;  // nominal vertex spacing (m)
inline constexpr double kMaxProjectionDistance = 50.0;
inline constexpr double kMinWindowLength = 10.0;
inline constexpr double kBezierControlDistance = 15.0;
inline constexpr double kBezierChord = 30.0;

struct TrackSegment {
  enum class Kind { kStraight, kArc, kBezier };
  Kind kind = Kind::kStraight;
  double length = 0.0;  // straight (m)
  double radius = 0.0;  // arc (m)
  double angle = 0.0;   // arc / bezier heading change, positive left (rad)
  double control_distance = kBezierControlDistance;  // bezier
  double chord = kBezierChord;                       // bezier

  static TrackSegment Straight(double length);
  static TrackSegment Arc(double radius, double angle);
  static TrackSegment Bezier(double angle);

  // "straight <m>", "arc <radius m> <angle deg>", "bezier <angle deg>
  // [control distance m] [chord m]".
  static absl::StatusOr<TrackSegment> Parse(const std::string& text);
};

struct PathPoint {
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double curvature = 0.0;
};

// Dense arc-length parametrized polyline. Open paths extend along their end
// tangents when queried outside [0, length].
class RefPath {
 public:
  RefPath() = default;
  RefPath(std::vector<PathPoint> points, bool closed);

  // Heading and curvature from finite differences of the vertices.
  static RefPath FromPolyline(std::span<const std::array<double, 2>> xy,
                              bool closed);

  const std::vector<PathPoint>& points() const { return points_; }
  double length() const { return points_.empty() ? 0.0 : points_.back().s; }
  bool closed() const { return closed_; }

  // Linear interpolation in s; curvature is taken from the nearer vertex.
  PathPoint At(double s) const;

 private:
  std::vector<PathPoint> points_;
  bool closed_ = false;
};

absl::StatusOr<RefPath> BuildTrack(std::span<const TrackSegment> segments,
                                   double x0 = 0.0, double y0 = 0.0,
                                   double heading0 = 0.0);

// Straight 60 m, left half circle R 20 m, straight 200 m, 135 deg Bezier
// turn, straight 100 m, left half circle R 10 m, -135 deg Bezier turn.
std::vector<TrackSegment> ReferenceTrackSegments();
RefPath BuildReferenceTrack();

// Arc length of the closest point; fails beyond kMaxProjectionDistance.
absl::StatusOr<double> Project(const RefPath& path, double x, double y);

// Signed lateral offset of (x, y) from the polyline, positive to the left.
struct PathDistance {
  double s = 0.0;
  double lateral = 0.0;
};
PathDistance DistanceToPolyline(const RefPath& path, double x, double y);

// Quintic local approximation of the path, coefficients in (s - s0).
struct PathWindow {
  double s0 = 0.0;
  double length = 0.0;
  std::array<double, 6> px{};
  std::array<double, 6> py{};
  double kappa_max = 0.0;
  double v_max = 0.0;
  double fit_rms = 0.0;
  double fit_max = 0.0;  // largest vertex residual (m)

  // Position and derivatives at arc length s (absolute). Outside
  // [s0, s0 + length] the polynomial is continued along its end tangent.
  double X(double s) const;
  double Y(double s) const;
  double dX(double s) const;
  double dY(double s) const;
  double ddX(double s) const;
  double ddY(double s) const;
  double Curvature(double s) const;
};

struct SpeedCap {
  double vx0 = 0.0;      // current speed (m/s)
  double ax_max = 0.0;   // envelope longitudinal bound at vx0 (m/s^2)
  double horizon = 3.0;  // T (s)
  double mu = 1.0;
};

inline constexpr double kWindowFitTolerance = 0.05;  // RMS (m)
inline constexpr double kWindowFitMaxError = 0.1;    // sup (m)

absl::StatusOr<PathWindow> FitWindow(const RefPath& path, double s0,
                                     double length, const SpeedCap& cap);

// Window length covering the farthest point reachable within the horizon.
double WindowLength(const SpeedCap& cap);

// Starts from WindowLength(cap) and shortens the window (not below
// kMinWindowLength) until the fit RMS is within kWindowFitTolerance and
// every vertex within kWindowFitMaxError. When shortened, kappa_max and
// v_max also cover the path curvature over the rest of the nominal length.
absl::StatusOr<PathWindow> FitAdaptiveWindow(const RefPath& path, double s0,
                                             const SpeedCap& cap);

// Obstacle placed relative to the path.
struct Obstacle {
  double s = 0.0;       // arc length of the foot point (m)
  double offset = 0.0;  // lateral offset, positive left (m)
  double radius = 1.0;
  int side = 0;  // pass side: +1 left, -1 right, 0 automatic

  // "<s> <offset> <radius> [left|right]".
  static absl::StatusOr<Obstacle> Parse(const std::string& text);
};

// p(X, Y) = c[0] + c[1] X + c[2] Y + c[3] X^2 + c[4] X Y + c[5] Y^2; the
// collision-free side is p <= 0.
struct ObstacleParabola {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
  double margin = 0.0;
  double nx = 0.0;  // unit normal toward the pass side
  double ny = 0.0;
  std::array<double, 6> c{};

  double Evaluate(double x, double y) const;
  std::array<double, 2> Gradient(double x, double y) const;
};

ObstacleParabola BuildParabola(double cx, double cy, double radius,
                               double margin, double nx, double ny);

// Margin added to the obstacle radius: body half width plus 0.3 m.
double ObstacleMargin(double vehicle_half_width);

struct PlacedObstacle {
  Obstacle obstacle;
  double x = 0.0;
  double y = 0.0;
  ObstacleParabola parabola;
};

PlacedObstacle PlaceObstacle(const RefPath& path, const Obstacle& obstacle,
                             double vehicle_half_width);

// Obstacles with s in [s0 - 5, s0 + vx0 T + 20] and |offset| < 6 m.
std::vector<PlacedObstacle> RelevantObstacles(
    std::span<const PlacedObstacle> obstacles, double s0, double vx0,
    double horizon);

absl::Status WritePathCsv(const std::string& path_csv, const RefPath& path);

}  // namespace limitplan

#endif  // LIMITPLAN_TRACK_H_
