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

#include "limitplan/envelope.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace limitplan {
namespace {

std::string ConfigPath(const std::string& name) {
  return std::string(LIMITPLAN_CONFIG_DIR) + "/" + name;
}

VehicleParams Params() {
  auto p = VehicleParams::ReadFile(ConfigPath("vehicle.cfg"));
  EXPECT_TRUE(p.ok()) << p.status();
  return *p;
}

TEST(MembershipTest, Examples) {
  const EnvelopeFit fit;
  EXPECT_TRUE(CheckMembership(fit, 10.0, 0.0, 0.0, 0.0));
  EXPECT_TRUE(CheckMembership(fit, 10.0, 0.0, fit.beta, fit.gamma * fit.beta));
  EXPECT_FALSE(CheckMembership(fit, 10.0, fit.AxMax(10.0) + 0.1, 0.0, 0.0));
  EXPECT_FALSE(CheckMembership(fit, 10.0, 0.0, 1.0, fit.gamma + 1e-6));
  EXPECT_FALSE(CheckMembership(fit, 10.0, 0.0, fit.beta + 0.01,
                               fit.gamma * (fit.beta + 0.01)));
}

TEST(MembershipTest, HalfPlanesCut) {
  const EnvelopeFit fit;
  // Inside the ellipse and the box but beyond 2.6 u_x + u_y <= 15.3.
  const double ux = 4.0, uy = 6.0;
  ASSERT_LT(std::pow(ux / fit.alpha, 2) + std::pow(uy / fit.beta, 2), 1.0);
  EXPECT_FALSE(CheckMembership(fit, 0.0, ux, uy, fit.gamma * uy));
  EXPECT_FALSE(CheckMembership(fit, 0.0, ux, -uy, -fit.gamma * uy));
}

TEST(EnvelopeFitTest, LongitudinalPolynomials) {
  const EnvelopeFit fit;
  EXPECT_NEAR(fit.AxMin(20.0), -9.3 - 0.013 * 20 + 0.00072 * 400, 1e-12);
  EXPECT_NEAR(fit.AxMin(20.0), -9.272, 1e-9);
  EXPECT_NEAR(fit.AxMax(0.0), 4.3, 1e-12);
}

TEST(EnvelopeFitTest, ConfigRoundTrip) {
  auto fit = EnvelopeFit::ReadFile(ConfigPath("envelope.cfg"));
  ASSERT_TRUE(fit.ok()) << fit.status();
  auto again = EnvelopeFit::FromConfig(fit->ToConfig());
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again->alpha, fit->alpha);
  EXPECT_EQ(again->beta, fit->beta);
  EXPECT_EQ(again->a, fit->a);
  EXPECT_EQ(again->b, fit->b);
  EXPECT_EQ(again->ax_min_poly, fit->ax_min_poly);
  EXPECT_EQ(again->ax_max_poly, fit->ax_max_poly);
  EXPECT_EQ(again->gamma, fit->gamma);
}

TEST(EnvelopeFitTest, ShippedFitIsSaneAndMonotone) {
  auto fit = EnvelopeFit::ReadFile(ConfigPath("envelope.cfg"));
  ASSERT_TRUE(fit.ok());
  for (double v = 0.0; v <= 50.0; v += 0.5) {
    EXPECT_LT(fit->AxMin(v), 0.0);
    EXPECT_GT(fit->AxMax(v), 0.0);
    EXPECT_LE(fit->AxMax(v + 0.5), fit->AxMax(v) + 1e-12);
  }
}

TEST(GeometryTest, HullOfSquareWithInteriorPoints) {
  std::vector<Point2> pts = {{0, 0},     {1, 0},   {1, 1},    {0, 1},
                             {0.5, 0.5}, {0.5, 0}, {0.2, 0.7}};
  const auto hull = ConvexHull(pts);
  ASSERT_EQ(hull.size(), 4u);
  EXPECT_NEAR(PolygonArea(hull), 1.0, 1e-12);
  EXPECT_NEAR(PolygonCentroid(hull).x(), 0.5, 1e-12);
  EXPECT_TRUE(PolygonContains(hull, {0.3, 0.3}));
  EXPECT_FALSE(PolygonContains(hull, {1.1, 0.3}));
  EXPECT_NEAR(PolygonRayExit(hull, {0.5, 0.5}, {1.0, 0.0}), 0.5, 1e-12);
  const auto big = DilatePolygon(hull, 1.05);
  EXPECT_NEAR(PolygonArea(big), 1.05 * 1.05, 1e-12);
}

TEST(SampleEnvelopeTest, ZeroInputCoastsStraight) {
  const VehicleParams p = Params();
  const SampleOutcome out =
      SimulateSample(p, 20.0, 0.0, 0.0, {0.0, 0.0, 0.0, 0.0}, 0.1, 1e-3);
  ASSERT_TRUE(out.ok);
  EXPECT_NEAR(out.sample.ay, 0.0, 1e-9);
  EXPECT_NEAR(out.sample.apsi, 0.0, 1e-9);
  const double losses =
      p.drag_coeff * 400.0 / p.mass + p.rolling_coeff * kGravity;
  EXPECT_LT(out.sample.ax, 0.0);
  EXPECT_NEAR(out.sample.ax, -losses, 0.3 * losses);
}

TEST(SampleEnvelopeTest, BoundedAndDeterministic) {
  const VehicleParams p = Params();
  SamplingOptions options;
  options.n_samples = 1000;
  options.seed = 7;
  auto a = SampleEnvelope(p, 15.0, options);
  auto b = SampleEnvelope(p, 15.0, options);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->samples, b->samples);
  EXPECT_GT(a->samples.size(), 900u);
  for (const AccelSample& s : a->samples) {
    EXPECT_LE(std::abs(s.ax), p.mu * kGravity + 1.0);
    EXPECT_LE(std::abs(s.ay), p.mu * kGravity + 1.0);
    EXPECT_LE(std::abs(s.vy0), 0.2 * s.vx0 + 1e-12);
  }
}

TEST(SampleEnvelopeTest, RejectsBadArguments) {
  const VehicleParams p = Params();
  SamplingOptions options;
  options.n_samples = 10;
  EXPECT_FALSE(SampleEnvelope(p, 10.0, options).ok());
  options.n_samples = 1000;
  EXPECT_FALSE(SampleEnvelope(p, 0.0, options).ok());
}

// Synthetic samples uniformly inside a known ellipse: the fit recovers the
// semi-axes.
TEST(FitEnvelopeTest, RecoversSyntheticEllipse) {
  const double alpha = 8.0, beta = 7.0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<AccelSample> samples;
  for (double v : {10.0, 20.0, 30.0}) {
    for (int i = 0; i < 4000; ++i) {
      const double r = std::sqrt(unit(rng));
      const double th = 2 * M_PI * unit(rng);
      AccelSample s;
      s.vx0 = v;
      s.ax = alpha * r * std::cos(th);
      s.ay = beta * r * std::sin(th);
      s.apsi = 0.5 * s.ay;
      samples.push_back(s);
    }
  }
  auto report = FitEnvelope(samples);
  ASSERT_TRUE(report.ok()) << report.status();
  EXPECT_NEAR(report->fit.alpha, alpha, 0.02 * alpha);
  EXPECT_NEAR(report->fit.beta, beta, 0.02 * beta);
  EXPECT_NEAR(report->fit.gamma, 0.5, 1e-9);
}

TEST(FitEnvelopeTest, RejectsTooFewGroupsAndDegenerateHulls) {
  std::vector<AccelSample> two;
  for (double v : {10.0, 20.0}) {
    for (int i = 0; i < 10; ++i)
      two.push_back({v, 0.0, std::cos(i), std::sin(i), 0});
  }
  EXPECT_FALSE(FitEnvelope(two).ok());
  std::vector<AccelSample> flat;
  for (double v : {10.0, 20.0, 30.0}) {
    for (int i = 0; i < 10; ++i) flat.push_back({v, 0.0, 0.1 * i, 0.0, 0.0});
  }
  EXPECT_FALSE(FitEnvelope(flat).ok());
}

// Small campaign on the shipped vehicle: the fitted region lies inside every
// speed group's dilated hull at 1 degree resolution.
TEST(FitEnvelopeTest, InnerApproximationOnSmallCampaign) {
  const VehicleParams p = Params();
  std::vector<AccelSample> all;
  SamplingOptions options;
  options.n_samples = 1500;
  for (double v : {5.0, 15.0, 25.0}) {
    auto r = SampleEnvelope(p, v, options);
    ASSERT_TRUE(r.ok());
    all.insert(all.end(), r->samples.begin(), r->samples.end());
  }
  auto report = FitEnvelope(all);
  ASSERT_TRUE(report.ok()) << report.status();
  EXPECT_LE(report->shrink_factor, 1.0);
  for (const SpeedGroup& g : report->groups) {
    for (const Point2& q : PolytopizeRegion(report->fit, g.vx0, 1.0)) {
      EXPECT_TRUE(PolygonContains(g.dilated, q, 1e-9))
          << g.vx0 << ": " << q.transpose();
    }
  }
}

TEST(SamplesCsvTest, RoundTrip) {
  const std::vector<AccelSample> samples = {{10, 0.5, 1.25, -2.5, 0.75},
                                            {20, -1, -8.125, 3, -1.5}};
  const std::string path = ::testing::TempDir() + "/samples.csv";
  ASSERT_TRUE(WriteSamplesCsv(path, samples).ok());
  auto back = ReadSamplesCsv(path);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, samples);
}

}  // namespace
}  // namespace limitplan
