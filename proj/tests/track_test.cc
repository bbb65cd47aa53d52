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

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace limitplan {
namespace {

constexpr double kPi = std::numbers::pi;

double WrapAngle(double a) { return std::remainder(a, 2 * kPi); }

// Polyline distance is the oracle for the window fit and for projection.
TEST(ReferenceTrackTest, LengthExceedsAnalyticSegments) {
  const RefPath path = BuildReferenceTrack();
  EXPECT_GT(path.length(), 60 + kPi * 20 + 200 + 100 + kPi * 10);
}

TEST(ReferenceTrackTest, SpacingAndTangentContinuity) {
  const RefPath path = BuildReferenceTrack();
  const auto& pts = path.points();
  for (size_t i = 1; i < pts.size(); ++i) {
    const double ds = pts[i].s - pts[i - 1].s;
    ASSERT_GT(ds, 0.0);
    ASSERT_GE(ds, 0.2);
    ASSERT_LE(ds, 0.3);
    ASSERT_NEAR(std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y),
                ds, 1e-9);
    if (i + 1 < pts.size()) {
      const double h0 =
          std::atan2(pts[i].y - pts[i - 1].y, pts[i].x - pts[i - 1].x);
      const double h1 =
          std::atan2(pts[i + 1].y - pts[i].y, pts[i + 1].x - pts[i].x);
      ASSERT_LT(std::abs(WrapAngle(h1 - h0)), 2.0 * kPi / 180.0) << i;
    }
  }
}

TEST(ReferenceTrackTest, CircleCurvature) {
  const RefPath path = BuildReferenceTrack();
  const double start = 60.0, end = 60.0 + kPi * 20.0;
  for (double s = start + 2.0; s < end - 2.0; s += 1.0) {
    EXPECT_NEAR(path.At(s).curvature, 0.05, 0.002) << s;
  }
}

TEST(TrackSegmentTest, BezierHeadingChange) {
  for (double deg : {135.0, -135.0, 90.0}) {
    const TrackSegment seg = TrackSegment::Bezier(deg * kPi / 180.0);
    const TrackSegment segs[] = {TrackSegment::Straight(10), seg,
                                 TrackSegment::Straight(10)};
    auto path = BuildTrack(segs);
    ASSERT_TRUE(path.ok());
    const double h0 = path->At(5.0).heading;
    const double h1 = path->At(path->length() - 5.0).heading;
    EXPECT_NEAR(WrapAngle(h1 - h0) * 180.0 / kPi, deg, 1.0);
  }
}

TEST(TrackSegmentTest, ParseErrors) {
  EXPECT_TRUE(TrackSegment::Parse("straight 10").ok());
  EXPECT_TRUE(TrackSegment::Parse("arc 20 180").ok());
  EXPECT_TRUE(TrackSegment::Parse("bezier -135").ok());
  EXPECT_FALSE(TrackSegment::Parse("straight").ok());
  EXPECT_FALSE(TrackSegment::Parse("straight -3").ok());
  EXPECT_FALSE(TrackSegment::Parse("spiral 3").ok());
  EXPECT_FALSE(TrackSegment::Parse("arc 0 90").ok());
}

RefPath Straight(double length) {
  const TrackSegment segs[] = {TrackSegment::Straight(length)};
  return *BuildTrack(segs);
}

TEST(ProjectTest, PointOnPath) {
  const RefPath path = BuildReferenceTrack();
  for (double s : {3.0, 77.7, 150.2, 333.3, 480.0}) {
    const PathPoint p = path.At(s);
    auto got = Project(path, p.x, p.y);
    ASSERT_TRUE(got.ok());
    EXPECT_NEAR(*got, s, 0.05);
  }
}

TEST(ProjectTest, LateralOffsetOnStraight) {
  const RefPath path = Straight(100.0);
  auto s = Project(path, 42.3, 2.0);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(*s, 42.3, 1e-9);
  const PathDistance d = DistanceToPolyline(path, 42.3, -2.0);
  EXPECT_NEAR(d.lateral, -2.0, 1e-9);
}

TEST(ProjectTest, HairpinTiePrefersLargerS) {
  const TrackSegment segs[] = {TrackSegment::Straight(20.0),
                               TrackSegment::Arc(5.0, kPi),
                               TrackSegment::Straight(20.0)};
  auto path = BuildTrack(segs);
  ASSERT_TRUE(path.ok());
  auto s = Project(*path, 10.0, 5.0);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(*s, 20.0 + 5.0 * kPi + 10.0, 0.05);
}

TEST(ProjectTest, FailsFarFromPath) {
  const RefPath path = Straight(100.0);
  EXPECT_FALSE(Project(path, 50.0, 60.0).ok());
}

TEST(FitWindowTest, StraightUsesAccelerationBranch) {
  const RefPath path = Straight(200.0);
  const SpeedCap cap{10.0, 4.0, 3.0, 1.0};
  auto w = FitWindow(path, 20.0, 60.0, cap);
  ASSERT_TRUE(w.ok());
  EXPECT_LE(w->kappa_max, 1e-4);
  EXPECT_NEAR(w->v_max, 10.0 + 4.0 * 3.0, 1e-9);
}

TEST(FitWindowTest, CircleUsesCurvatureBranch) {
  const TrackSegment segs[] = {TrackSegment::Arc(20.0, 1.5 * kPi)};
  auto path = BuildTrack(segs);
  ASSERT_TRUE(path.ok());
  const SpeedCap cap{10.0, 4.0, 3.0, 1.0};
  auto w = FitWindow(*path, 5.0, 30.0, cap);
  ASSERT_TRUE(w.ok());
  EXPECT_NEAR(w->kappa_max, 0.05, 0.002);
  EXPECT_NEAR(w->v_max, std::sqrt(9.81 / 0.05), 0.3);
  EXPECT_LE(w->v_max, std::sqrt(9.81 / w->kappa_max) + 1e-9);
}

TEST(FitWindowTest, RejectsShortWindow) {
  const RefPath path = Straight(100.0);
  EXPECT_FALSE(FitWindow(path, 0.0, 5.0, SpeedCap{1, 4, 3, 1}).ok());
}

// Every adaptive window along the reference track fits the polyline.
TEST(FitWindowTest, AdaptiveWindowsFitReferenceTrack) {
  const RefPath path = BuildReferenceTrack();
  for (double v : {5.0, 15.0, 30.0}) {
    const SpeedCap cap{v, 4.0, 3.0, 1.0};
    for (double s0 = 0.0; s0 < path.length() - 10.0; s0 += 2.5) {
      auto w = FitAdaptiveWindow(path, s0, cap);
      ASSERT_TRUE(w.ok()) << s0;
      ASSERT_LE(w->fit_rms, kWindowFitTolerance) << s0;
      ASSERT_LE(w->fit_max, kWindowFitMaxError) << s0;
      double sup = 0.0;
      for (const PathPoint& p : path.points()) {
        if (p.s < s0 || p.s > s0 + w->length) continue;
        sup = std::max(sup, std::hypot(w->X(p.s) - p.x, w->Y(p.s) - p.y));
      }
      ASSERT_LE(sup, 0.1) << v << " " << s0;
      ASSERT_LE(w->v_max,
                std::sqrt(9.81 / std::max(w->kappa_max, 1e-12)) + 1e-9);
      ASSERT_LE(w->v_max, v + 4.0 * 3.0 + 1e-9);
      ASSERT_GE(w->kappa_max, 0.0);
    }
  }
}

TEST(ParabolaTest, Examples) {
  const ObstacleParabola p = BuildParabola(0.0, 0.0, 1.0, 0.5, 0.0, 1.0);
  EXPECT_NEAR(p.Evaluate(0.0, 0.0), 1.5, 1e-12);
  EXPECT_NEAR(p.Evaluate(0.0, 1.5), 0.0, 1e-12);
  EXPECT_NEAR(p.Evaluate(1.5, 0.0), 0.0, 1e-12);
  EXPECT_NEAR(p.Evaluate(-1.5, 0.0), 0.0, 1e-12);
  for (double u = -5.0; u <= 5.0; u += 0.25) {
    EXPECT_LE(p.Evaluate(u, 1.5), 1e-12);
    EXPECT_LE(p.Evaluate(u, 3.0), 0.0);
  }
}

TEST(ParabolaTest, ContainsDiscInAnyOrientation) {
  for (double angle : {0.0, 0.4, 2.0, -2.7}) {
    const double nx = std::cos(angle), ny = std::sin(angle);
    const ObstacleParabola p = BuildParabola(3.0, -7.0, 1.2, 1.1, nx, ny);
    EXPECT_GT(p.Evaluate(3.0, -7.0), 0.0);
    for (int i = 0; i < 360; ++i) {
      const double t = i * kPi / 180.0;
      EXPECT_GT(p.Evaluate(3.0 + 1.2 * std::cos(t), -7.0 + 1.2 * std::sin(t)),
                0.0);
    }
    // Vertex on the pass side.
    EXPECT_NEAR(p.Evaluate(3.0 + 2.3 * nx, -7.0 + 2.3 * ny), 0.0, 1e-9);
  }
}

TEST(ParabolaTest, GradientMatchesFiniteDifference) {
  const ObstacleParabola p = BuildParabola(1.0, 2.0, 1.0, 0.8, 0.6, 0.8);
  const double x = 1.7, y = 0.4, h = 1e-6;
  const auto g = p.Gradient(x, y);
  EXPECT_NEAR(g[0], (p.Evaluate(x + h, y) - p.Evaluate(x - h, y)) / (2 * h),
              1e-7);
  EXPECT_NEAR(g[1], (p.Evaluate(x, y + h) - p.Evaluate(x, y - h)) / (2 * h),
              1e-7);
}

TEST(RelevantObstaclesTest, Examples) {
  const RefPath path = Straight(1000.0);
  std::vector<PlacedObstacle> obs = {
      PlaceObstacle(path, Obstacle{510.0, 0.0, 1.0, 0}, 0.9),
      PlaceObstacle(path, Obstacle{20.0, 0.0, 1.0, 0}, 0.9),
      PlaceObstacle(path, Obstacle{20.0, 10.0, 1.0, 0}, 0.9),
      PlaceObstacle(path, Obstacle{6.0, 1.0, 1.0, 0}, 0.9),
      PlaceObstacle(path, Obstacle{4.0, 1.0, 1.0, 0}, 0.9)};
  const auto rel = RelevantObstacles(obs, 10.0, 15.0, 3.0);
  ASSERT_EQ(rel.size(), 2u);
  EXPECT_EQ(rel[0].obstacle.s, 20.0);
  EXPECT_EQ(rel[0].obstacle.offset, 0.0);
  EXPECT_EQ(rel[1].obstacle.s, 6.0);  // s = 4 is behind s0 - 5
}

TEST(PlaceObstacleTest, PassSideOppositeOffset) {
  const RefPath path = Straight(100.0);
  const PlacedObstacle left = PlaceObstacle(path, {50.0, 0.5, 1.0, 0}, 0.9);
  EXPECT_NEAR(left.y, 0.5, 1e-12);
  EXPECT_LT(left.parabola.ny, 0.0);
  const PlacedObstacle right = PlaceObstacle(path, {50.0, -0.5, 1.0, 0}, 0.9);
  EXPECT_GT(right.parabola.ny, 0.0);
  const PlacedObstacle forced = PlaceObstacle(path, {50.0, -0.5, 1.0, -1}, 0.9);
  EXPECT_LT(forced.parabola.ny, 0.0);
  EXPECT_NEAR(left.parabola.margin, 0.9 + 0.3, 1e-12);
}

}  // namespace
}  // namespace limitplan
