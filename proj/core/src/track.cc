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

#include "limitplan/track.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "Eigen/Dense"
#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "limitplan/dynamics.h"

namespace limitplan {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFineStep = 0.01;  // m, resolution before resampling

double DegToRad(double deg) { return deg * kPi / 180.0; }

// Appends points of one segment (excluding its first point) to `fine`.
void AppendStraight(double length, std::vector<PathPoint>& fine) {
  const PathPoint start = fine.back();
  const int n = std::max(1, static_cast<int>(std::ceil(length / kFineStep)));
  const double c = std::cos(start.heading);
  const double s = std::sin(start.heading);
  for (int i = 1; i <= n; ++i) {
    const double d = length * i / n;
    fine.push_back(
        {start.s + d, start.x + d * c, start.y + d * s, start.heading, 0.0});
  }
}

void AppendArc(double radius, double angle, std::vector<PathPoint>& fine) {
  const PathPoint start = fine.back();
  const double sign = angle >= 0.0 ? 1.0 : -1.0;
  const double length = radius * std::abs(angle);
  // Center lies on the left normal for left turns.
  const double cx = start.x - sign * radius * std::sin(start.heading);
  const double cy = start.y + sign * radius * std::cos(start.heading);
  const int n = std::max(1, static_cast<int>(std::ceil(length / kFineStep)));
  for (int i = 1; i <= n; ++i) {
    const double h = start.heading + angle * i / n;
    fine.push_back({start.s + length * i / n, cx + sign * radius * std::sin(h),
                    cy - sign * radius * std::cos(h), h, sign / radius});
  }
}

void AppendBezier(const TrackSegment& seg, std::vector<PathPoint>& fine) {
  const PathPoint start = fine.back();
  const double h0 = start.heading;
  const Eigen::Vector2d p0(start.x, start.y);
  const Eigen::Vector2d t0(std::cos(h0), std::sin(h0));
  const Eigen::Vector2d t1(std::cos(h0 + seg.angle), std::sin(h0 + seg.angle));
  const Eigen::Vector2d p3 =
      p0 + seg.chord * Eigen::Vector2d(std::cos(h0 + seg.angle / 2),
                                       std::sin(h0 + seg.angle / 2));
  const Eigen::Vector2d p1 = p0 + seg.control_distance * t0;
  const Eigen::Vector2d p2 = p3 - seg.control_distance * t1;

  const int n = 20000;
  Eigen::Vector2d prev = p0;
  double s = start.s;
  double heading = h0;
  for (int i = 1; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    const double v = 1.0 - u;
    const Eigen::Vector2d p = v * v * v * p0 + 3 * v * v * u * p1 +
                              3 * v * u * u * p2 + u * u * u * p3;
    const Eigen::Vector2d d1 =
        3 * v * v * (p1 - p0) + 6 * v * u * (p2 - p1) + 3 * u * u * (p3 - p2);
    const Eigen::Vector2d d2 =
        6 * v * (p2 - 2 * p1 + p0) + 6 * u * (p3 - 2 * p2 + p1);
    s += (p - prev).norm();
    prev = p;
    // Keep heading continuous.
    const double raw = std::atan2(d1.y(), d1.x());
    heading += std::remainder(raw - heading, 2 * kPi);
    const double kappa =
        (d1.x() * d2.y() - d1.y() * d2.x()) / std::pow(d1.norm(), 3);
    fine.push_back({s, p.x(), p.y(), heading, kappa});
  }
}

PathPoint Lerp(const PathPoint& a, const PathPoint& b, double s) {
  const double w = (b.s > a.s) ? (s - a.s) / (b.s - a.s) : 0.0;
  return {s, a.x + w * (b.x - a.x), a.y + w * (b.y - a.y),
          a.heading + w * (b.heading - a.heading),
          w < 0.5 ? a.curvature : b.curvature};
}

double Poly(const std::array<double, 6>& c, double t) {
  double v = 0.0;
  for (int k = 5; k >= 0; --k) v = v * t + c[k];
  return v;
}
double PolyD1(const std::array<double, 6>& c, double t) {
  double v = 0.0;
  for (int k = 5; k >= 1; --k) v = v * t + k * c[k];
  return v;
}
double PolyD2(const std::array<double, 6>& c, double t) {
  double v = 0.0;
  for (int k = 5; k >= 2; --k) v = v * t + k * (k - 1) * c[k];
  return v;
}

struct Foot {
  double s = 0.0;
  double distance = 0.0;
};

Foot ClosestPoint(const RefPath& path, double x, double y) {
  const auto& pts = path.points();
  const int n = static_cast<int>(pts.size());
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  // Ties go to the later vertex.
  for (int i = 0; i < n; ++i) {
    const double d2 =
        (pts[i].x - x) * (pts[i].x - x) + (pts[i].y - y) * (pts[i].y - y);
    if (d2 <= best_d2 + 1e-12) {
      best_d2 = std::min(d2, best_d2);
      best = i;
    }
  }
  auto d2_at = [&](int i) {
    return (pts[i].x - x) * (pts[i].x - x) + (pts[i].y - y) * (pts[i].y - y);
  };
  double s = pts[best].s;
  if (best > 0 && best < n - 1) {
    // Quadratic through the squared distances of the three vertices.
    const double s0 = pts[best - 1].s, s1 = pts[best].s, s2 = pts[best + 1].s;
    const double f0 = d2_at(best - 1), f1 = best_d2, f2 = d2_at(best + 1);
    const double d01 = (f1 - f0) / (s1 - s0);
    const double d12 = (f2 - f1) / (s2 - s1);
    const double a = (d12 - d01) / (s2 - s0);
    if (a > 0.0) {
      const double b = d01 - a * (s0 + s1);
      s = std::clamp(-b / (2.0 * a), s0, s2);
    }
  } else if (!path.closed()) {
    // End vertices: project onto the extension of the end segment.
    const int i0 = best == 0 ? 0 : n - 2;
    const PathPoint& a = pts[i0];
    const PathPoint& b = pts[i0 + 1];
    const double len = b.s - a.s;
    const double t =
        ((x - a.x) * (b.x - a.x) + (y - a.y) * (b.y - a.y)) / (len * len);
    const double along = a.s + t * len;
    s = best == 0 ? std::min(along, a.s) : std::max(along, b.s);
  }
  const PathPoint foot = path.At(s);
  return {s, std::hypot(foot.x - x, foot.y - y)};
}

}  // namespace

TrackSegment TrackSegment::Straight(double length) {
  TrackSegment seg;
  seg.kind = Kind::kStraight;
  seg.length = length;
  return seg;
}

TrackSegment TrackSegment::Arc(double radius, double angle) {
  TrackSegment seg;
  seg.kind = Kind::kArc;
  seg.radius = radius;
  seg.angle = angle;
  return seg;
}

TrackSegment TrackSegment::Bezier(double angle) {
  TrackSegment seg;
  seg.kind = Kind::kBezier;
  seg.angle = angle;
  return seg;
}

absl::StatusOr<TrackSegment> TrackSegment::Parse(const std::string& text) {
  std::vector<std::string> tokens =
      absl::StrSplit(text, absl::ByAnyChar(" \t"), absl::SkipEmpty());
  if (tokens.empty()) return absl::InvalidArgumentError("empty segment");
  std::vector<double> args;
  for (size_t i = 1; i < tokens.size(); ++i) {
    double v = 0.0;
    if (!absl::SimpleAtod(tokens[i], &v)) {
      return absl::InvalidArgumentError(
          absl::StrCat("segment `", text, "`: bad number ", tokens[i]));
    }
    args.push_back(v);
  }
  const std::string kind = absl::AsciiStrToLower(tokens[0]);
  auto arity_error = [&] {
    return absl::InvalidArgumentError(
        absl::StrCat("segment `", text, "`: wrong number of arguments"));
  };
  if (kind == "straight") {
    if (args.size() != 1) return arity_error();
    if (!(args[0] > 0.0)) return absl::InvalidArgumentError("length <= 0");
    return Straight(args[0]);
  }
  if (kind == "arc") {
    if (args.size() != 2) return arity_error();
    if (!(args[0] > 0.0)) return absl::InvalidArgumentError("radius <= 0");
    return Arc(args[0], DegToRad(args[1]));
  }
  if (kind == "bezier") {
    if (args.empty() || args.size() > 3) return arity_error();
    TrackSegment seg = Bezier(DegToRad(args[0]));
    if (args.size() >= 2) seg.control_distance = args[1];
    if (args.size() >= 3) seg.chord = args[2];
    if (!(seg.control_distance > 0.0) || !(seg.chord > 0.0)) {
      return absl::InvalidArgumentError("bezier distances must be positive");
    }
    return seg;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown segment kind `", tokens[0], "`"));
}

RefPath::RefPath(std::vector<PathPoint> points, bool closed)
    : points_(std::move(points)), closed_(closed) {}

RefPath RefPath::FromPolyline(std::span<const std::array<double, 2>> xy,
                              bool closed) {
  const int n = static_cast<int>(xy.size());
  std::vector<PathPoint> pts(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i > 0)
      s += std::hypot(xy[i][0] - xy[i - 1][0], xy[i][1] - xy[i - 1][1]);
    pts[i].s = s;
    pts[i].x = xy[i][0];
    pts[i].y = xy[i][1];
  }
  double prev_heading = 0.0;
  for (int i = 0; i < n && n > 1; ++i) {
    const int a = std::max(0, i - 1);
    const int b = std::min(n - 1, i + 1);
    const double raw = std::atan2(xy[b][1] - xy[a][1], xy[b][0] - xy[a][0]);
    const double h =
        i == 0 ? raw
               : prev_heading + std::remainder(raw - prev_heading, 2 * kPi);
    pts[i].heading = h;
    prev_heading = h;
    if (i > 0 && i < n - 1) {
      // Signed curvature of the circle through three consecutive vertices.
      const double ax = xy[i][0] - xy[i - 1][0], ay = xy[i][1] - xy[i - 1][1];
      const double bx = xy[i + 1][0] - xy[i][0], by = xy[i + 1][1] - xy[i][1];
      const double cx = xy[i + 1][0] - xy[i - 1][0];
      const double cy = xy[i + 1][1] - xy[i - 1][1];
      const double denom =
          std::hypot(ax, ay) * std::hypot(bx, by) * std::hypot(cx, cy);
      pts[i].curvature = denom > 0.0 ? 2.0 * (ax * by - ay * bx) / denom : 0.0;
    }
  }
  if (n > 2) {
    pts.front().curvature = pts[1].curvature;
    pts.back().curvature = pts[n - 2].curvature;
  }
  return RefPath(std::move(pts), closed);
}

PathPoint RefPath::At(double s) const {
  if (points_.empty()) return {};
  const double len = length();
  if (closed_ && len > 0.0) {
    s = std::fmod(s, len);
    if (s < 0.0) s += len;
  }
  if (s <= 0.0 || points_.size() == 1) {
    const PathPoint& p = points_.front();
    return {s, p.x + s * std::cos(p.heading), p.y + s * std::sin(p.heading),
            p.heading, s < 0.0 ? 0.0 : p.curvature};
  }
  if (s >= len) {
    const PathPoint& p = points_.back();
    const double d = s - len;
    return {s, p.x + d * std::cos(p.heading), p.y + d * std::sin(p.heading),
            p.heading, d > 0.0 ? 0.0 : p.curvature};
  }
  auto it = std::upper_bound(
      points_.begin(), points_.end(), s,
      [](double value, const PathPoint& p) { return value < p.s; });
  return Lerp(*(it - 1), *it, s);
}

absl::StatusOr<RefPath> BuildTrack(std::span<const TrackSegment> segments,
                                   double x0, double y0, double heading0) {
  if (segments.empty()) return absl::InvalidArgumentError("no segments");
  std::vector<PathPoint> fine{{0.0, x0, y0, heading0, 0.0}};
  for (const TrackSegment& seg : segments) {
    switch (seg.kind) {
      case TrackSegment::Kind::kStraight:
        if (!(seg.length > 0.0)) return absl::InvalidArgumentError("length");
        AppendStraight(seg.length, fine);
        break;
      case TrackSegment::Kind::kArc:
        if (!(seg.radius > 0.0)) return absl::InvalidArgumentError("radius");
        AppendArc(seg.radius, seg.angle, fine);
        break;
      case TrackSegment::Kind::kBezier:
        AppendBezier(seg, fine);
        break;
    }
  }
  fine.front().curvature = fine[1].curvature;

  const double total = fine.back().s;
  const int n = static_cast<int>(std::ceil(total / kPathSpacing));
  std::vector<PathPoint> pts;
  pts.reserve(n + 1);
  size_t j = 0;
  for (int i = 0; i <= n; ++i) {
    const double s = total * i / n;
    while (j + 2 < fine.size() && fine[j + 1].s < s) ++j;
    pts.push_back(Lerp(fine[j], fine[j + 1], s));
  }
  // Arc length of the resampled polyline, not of the underlying curve.
  for (int i = 1; i <= n; ++i) {
    pts[i].s = pts[i - 1].s +
               std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
  }
  return RefPath(std::move(pts), false);
}

std::vector<TrackSegment> ReferenceTrackSegments() {
  return {TrackSegment::Straight(60.0),
          TrackSegment::Arc(20.0, kPi),
          TrackSegment::Straight(200.0),
          TrackSegment::Bezier(DegToRad(135.0)),
          TrackSegment::Straight(100.0),
          TrackSegment::Arc(10.0, kPi),
          TrackSegment::Bezier(DegToRad(-135.0))};
}

RefPath BuildReferenceTrack() {
  const auto segments = ReferenceTrackSegments();
  return *BuildTrack(segments);
}

absl::StatusOr<double> Project(const RefPath& path, double x, double y) {
  if (path.points().size() < 2) {
    return absl::FailedPreconditionError("path has fewer than 2 points");
  }
  const Foot foot = ClosestPoint(path, x, y);
  if (!(foot.distance <= kMaxProjectionDistance)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "(%.2f, %.2f) is %.1f m from the path", x, y, foot.distance));
  }
  return foot.s;
}

PathDistance DistanceToPolyline(const RefPath& path, double x, double y) {
  const Foot foot = ClosestPoint(path, x, y);
  const PathPoint p = path.At(foot.s);
  const double cross =
      std::cos(p.heading) * (y - p.y) - std::sin(p.heading) * (x - p.x);
  return {foot.s, cross >= 0.0 ? foot.distance : -foot.distance};
}

namespace {

// Local coordinate clamped to the window and the linear continuation beyond.
struct WindowArg {
  double t = 0.0;
  double excess = 0.0;
};
WindowArg Split(const PathWindow& w, double s) {
  const double t = s - w.s0;
  const double tc = std::clamp(t, 0.0, w.length);
  return {tc, t - tc};
}

}  // namespace

double PathWindow::X(double s) const {
  const auto [t, e] = Split(*this, s);
  return Poly(px, t) + e * PolyD1(px, t);
}
double PathWindow::Y(double s) const {
  const auto [t, e] = Split(*this, s);
  return Poly(py, t) + e * PolyD1(py, t);
}
double PathWindow::dX(double s) const { return PolyD1(px, Split(*this, s).t); }
double PathWindow::dY(double s) const { return PolyD1(py, Split(*this, s).t); }
double PathWindow::ddX(double s) const {
  const auto [t, e] = Split(*this, s);
  return e == 0.0 ? PolyD2(px, t) : 0.0;
}
double PathWindow::ddY(double s) const {
  const auto [t, e] = Split(*this, s);
  return e == 0.0 ? PolyD2(py, t) : 0.0;
}

double PathWindow::Curvature(double s) const {
  const double xd = dX(s), yd = dY(s);
  const double speed2 = xd * xd + yd * yd;
  if (speed2 <= 0.0) return 0.0;
  return std::abs(xd * ddY(s) - yd * ddX(s)) / std::pow(speed2, 1.5);
}

double WindowLength(const SpeedCap& cap) {
  const double reach =
      (std::max(cap.vx0, 0.0) + std::max(cap.ax_max, 0.0) * cap.horizon) *
      cap.horizon;
  return std::max(kMinWindowLength, reach);
}

absl::StatusOr<PathWindow> FitWindow(const RefPath& path, double s0,
                                     double length, const SpeedCap& cap) {
  if (!std::isfinite(s0) || !std::isfinite(length)) {
    return absl::InvalidArgumentError("non-finite window");
  }
  if (length < kMinWindowLength) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "window of %.2f m is shorter than %.0f m", length, kMinWindowLength));
  }
  if (path.points().size() < 2) {
    return absl::FailedPreconditionError("path has fewer than 2 points");
  }
  const int n = static_cast<int>(std::ceil(length / kPathSpacing)) + 1;
  Eigen::MatrixXd v(n, 6);
  Eigen::MatrixXd rhs(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    const PathPoint p = path.At(s0 + t * length);
    double tk = 1.0;
    for (int k = 0; k < 6; ++k, tk *= t) v(i, k) = tk;
    rhs(i, 0) = p.x;
    rhs(i, 1) = p.y;
  }
  // Fitted on the unit interval, then rescaled to metres.
  const Eigen::MatrixXd coef = v.colPivHouseholderQr().solve(rhs);
  const Eigen::MatrixXd residual = v * coef - rhs;

  PathWindow w;
  w.s0 = s0;
  w.length = length;
  double scale = 1.0;
  for (int k = 0; k < 6; ++k, scale /= length) {
    w.px[k] = coef(k, 0) * scale;
    w.py[k] = coef(k, 1) * scale;
  }
  w.fit_rms = std::sqrt(residual.rowwise().squaredNorm().mean());
  w.fit_max = std::sqrt(residual.rowwise().squaredNorm().maxCoeff());
  for (int i = 0; i < 100; ++i) {
    w.kappa_max = std::max(w.kappa_max, w.Curvature(s0 + length * i / 99.0));
  }
  const double reachable = cap.vx0 + cap.ax_max * cap.horizon;
  const double grip = w.kappa_max > 0.0
                          ? std::sqrt(cap.mu * kGravity / w.kappa_max)
                          : std::numeric_limits<double>::infinity();
  w.v_max = std::min(reachable, grip);
  return w;
}

absl::StatusOr<PathWindow> FitAdaptiveWindow(const RefPath& path, double s0,
                                             const SpeedCap& cap) {
  const double nominal = WindowLength(cap);
  double length = nominal;
  absl::StatusOr<PathWindow> window;
  while (true) {
    window = FitWindow(path, s0, length, cap);
    if (!window.ok() || length <= kMinWindowLength ||
        (window->fit_rms <= kWindowFitTolerance &&
         window->fit_max <= kWindowFitMaxError)) {
      break;
    }
    length = std::max(kMinWindowLength, 0.85 * length);
  }
  if (!window.ok() || length >= nominal) return window;
  // Keep the speed bound aware of curvature in the part that was cut off.
  double kappa = 0.0;
  for (double s = s0 + length; s <= s0 + nominal; s += kPathSpacing) {
    kappa = std::max(kappa, std::abs(path.At(s).curvature));
  }
  if (kappa > window->kappa_max) {
    window->kappa_max = kappa;
    window->v_max =
        std::min(window->v_max, std::sqrt(cap.mu * kGravity / kappa));
  }
  return window;
}

absl::StatusOr<Obstacle> Obstacle::Parse(const std::string& text) {
  std::vector<std::string> tokens =
      absl::StrSplit(text, absl::ByAnyChar(" \t,"), absl::SkipEmpty());
  if (tokens.size() != 3 && tokens.size() != 4) {
    return absl::InvalidArgumentError(
        absl::StrCat("obstacle `", text, "`: expected s offset radius [side]"));
  }
  Obstacle o;
  if (!absl::SimpleAtod(tokens[0], &o.s) ||
      !absl::SimpleAtod(tokens[1], &o.offset) ||
      !absl::SimpleAtod(tokens[2], &o.radius)) {
    return absl::InvalidArgumentError(
        absl::StrCat("obstacle `", text, "`: bad number"));
  }
  if (!(o.radius > 0.0)) return absl::InvalidArgumentError("radius <= 0");
  if (tokens.size() == 4) {
    const std::string side = absl::AsciiStrToLower(tokens[3]);
    if (side == "left") {
      o.side = 1;
    } else if (side == "right") {
      o.side = -1;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("obstacle side must be left or right: ", tokens[3]));
    }
  }
  return o;
}

double ObstacleParabola::Evaluate(double x, double y) const {
  return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y +
         c[5] * y * y;
}

std::array<double, 2> ObstacleParabola::Gradient(double x, double y) const {
  return {c[1] + 2 * c[3] * x + c[4] * y, c[2] + c[4] * x + 2 * c[5] * y};
}

ObstacleParabola BuildParabola(double cx, double cy, double radius,
                               double margin, double nx, double ny) {
  ObstacleParabola p;
  p.cx = cx;
  p.cy = cy;
  p.radius = radius;
  p.margin = margin;
  p.nx = nx;
  p.ny = ny;
  const double h = radius + margin;
  const double k = 1.0 / h;  // h / a^2 with a = h
  const double tx = -ny, ty = nx;
  // p = h - k u^2 - w, u = t.(P - c), w = n.(P - c).
  p.c[3] = -k * tx * tx;
  p.c[4] = -2.0 * k * tx * ty;
  p.c[5] = -k * ty * ty;
  p.c[1] = 2.0 * k * (tx * tx * cx + tx * ty * cy) - nx;
  p.c[2] = 2.0 * k * (tx * ty * cx + ty * ty * cy) - ny;
  p.c[0] =
      h -
      k * (tx * tx * cx * cx + 2.0 * tx * ty * cx * cy + ty * ty * cy * cy) +
      nx * cx + ny * cy;
  return p;
}

double ObstacleMargin(double vehicle_half_width) {
  return vehicle_half_width + 0.3;
}

PlacedObstacle PlaceObstacle(const RefPath& path, const Obstacle& obstacle,
                             double vehicle_half_width) {
  const PathPoint p = path.At(obstacle.s);
  const double lx = -std::sin(p.heading), ly = std::cos(p.heading);
  PlacedObstacle placed;
  placed.obstacle = obstacle;
  placed.x = p.x + obstacle.offset * lx;
  placed.y = p.y + obstacle.offset * ly;
  int side = obstacle.side;
  if (side == 0) side = obstacle.offset > 0.0 ? -1 : 1;
  placed.parabola =
      BuildParabola(placed.x, placed.y, obstacle.radius,
                    ObstacleMargin(vehicle_half_width), side * lx, side * ly);
  return placed;
}

std::vector<PlacedObstacle> RelevantObstacles(
    std::span<const PlacedObstacle> obstacles, double s0, double vx0,
    double horizon) {
  std::vector<PlacedObstacle> out;
  const double lo = s0 - 5.0;
  const double hi = s0 + std::max(vx0, 0.0) * horizon + 20.0;
  for (const PlacedObstacle& o : obstacles) {
    if (o.obstacle.s >= lo && o.obstacle.s <= hi &&
        std::abs(o.obstacle.offset) < 6.0) {
      out.push_back(o);
    }
  }
  return out;
}

absl::Status WritePathCsv(const std::string& path_csv, const RefPath& path) {
  std::ofstream out(path_csv);
  if (!out)
    return absl::UnavailableError(absl::StrCat("cannot write ", path_csv));
  out << "s,x,y,heading,curvature\n";
  for (const PathPoint& p : path.points()) {
    out << absl::StrFormat("%.6f,%.6f,%.6f,%.9f,%.9f\n", p.s, p.x, p.y,
                           p.heading, p.curvature);
  }
  return out.good()
             ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("short write ", path_csv));
}

}  // namespace limitplan
