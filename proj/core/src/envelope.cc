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

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "Eigen/Dense"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"

namespace limitplan {
namespace {

constexpr double kMinHullArea = 1.0;

// splitmix64 finalizer; gives every sample an independent stream.
std::uint64_t MixSeed(std::uint64_t seed, double vx0, std::uint64_t index) {
  std::uint64_t z =
      seed ^ std::bit_cast<std::uint64_t>(vx0) * 0x9E3779B97F4A7C15ULL;
  z += (index + 1) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SampleOutcome DrawAndSimulate(const VehicleParams& params, double vx0,
                              const SamplingOptions& options,
                              std::uint64_t index) {
  std::mt19937_64 rng(MixSeed(options.seed, vx0, index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * unit(rng);
  };

  const double band = options.lateral_band * vx0;
  const double vy0 = uniform(-band, band);
  const double delta = uniform(-params.delta_max, params.delta_max);
  std::array<double, kNumWheels> torque{};
  if (unit(rng) < options.common_torque_fraction) {
    torque.fill(uniform(params.torque_min, params.torque_max));
  } else {
    for (double& t : torque) t = uniform(params.torque_min, params.torque_max);
  }
  return SimulateSample(params, vx0, vy0, delta, torque, options.horizon,
                        options.dt);
}

double EvalPoly(std::span<const double> coeffs, double x) {
  double value = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    value = value * x + *it;
  }
  return value;
}

// Least-squares polynomial through (x, y) of the given number of
// coefficients, lowest order first.
std::vector<double> FitPolynomial(std::span<const double> x,
                                  std::span<const double> y, int n_coeffs) {
  Eigen::MatrixXd v(x.size(), n_coeffs);
  Eigen::VectorXd rhs(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double p = 1.0;
    for (int j = 0; j < n_coeffs; ++j) {
      v(i, j) = p;
      p *= x[i];
    }
    rhs[i] = y[i];
  }
  Eigen::VectorXd c = v.colPivHouseholderQr().solve(rhs);
  return {c.data(), c.data() + c.size()};
}

double Cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

SampleOutcome SimulateSample(const VehicleParams& params, double vx0,
                             double vy0, double delta,
                             const std::array<double, kNumWheels>& torque,
                             double horizon, double dt) {
  SampleOutcome outcome;
  outcome.sample.vx0 = vx0;
  outcome.sample.vy0 = vy0;

  VehicleState state = TrimmedState(params, vx0, vy0, delta);
  const double spin_limit =
      5.0 * std::max(*std::max_element(state.omega.begin(), state.omega.end()),
                     kSlipRegularizationSpeed / params.wheel_radius);
  ControlInput input;
  input.torque = torque;
  input.delta_cmd = delta;

  const int steps = static_cast<int>(std::lround(horizon / dt));
  // Trapezoidal integrals of the rotating-frame terms psi_dot * V.
  double coriolis_x = 0.0;
  double coriolis_y = 0.0;
  const VehicleState initial = state;
  for (int k = 0; k < steps; ++k) {
    auto next = Step(state, input, params, dt);
    if (!next.ok()) return outcome;
    coriolis_x +=
        0.5 * dt * (state.psi_dot * state.vy + next->psi_dot * next->vy);
    coriolis_y +=
        0.5 * dt * (state.psi_dot * state.vx + next->psi_dot * next->vx);
    state = *next;
    for (double w : state.omega) {
      if (!std::isfinite(w) || std::abs(w) > spin_limit) return outcome;
    }
  }
  const double span = steps * dt;
  outcome.sample.ax = (state.vx - initial.vx - coriolis_x) / span;
  outcome.sample.ay = (state.vy - initial.vy + coriolis_y) / span;
  outcome.sample.apsi = (state.psi_dot - initial.psi_dot) / span;
  outcome.ok = std::isfinite(outcome.sample.ax) &&
               std::isfinite(outcome.sample.ay) &&
               std::isfinite(outcome.sample.apsi);
  return outcome;
}

absl::StatusOr<SamplingReport> SampleEnvelope(const VehicleParams& params,
                                              double vx0,
                                              const SamplingOptions& options) {
  if (!(vx0 > 0.0)) {
    return absl::InvalidArgumentError("sampling speed must be positive");
  }
  if (options.n_samples < 1000) {
    return absl::InvalidArgumentError("at least 1000 samples are required");
  }
  if (!(options.horizon > 0.0) || !(options.dt > 0.0) ||
      options.dt > kMaxPlantStep) {
    return absl::InvalidArgumentError("bad sampling horizon or step");
  }
  const int n = options.n_samples;
  std::vector<SampleOutcome> outcomes(n);
  int threads = options.threads > 0
                    ? options.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, n);
  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      outcomes[i] = DrawAndSimulate(params, vx0, options, i);
    }
  };
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back(work, n * t / threads, n * (t + 1) / threads);
    }
  }
  SamplingReport report;
  for (const SampleOutcome& o : outcomes) {
    if (o.ok) {
      report.samples.push_back(o.sample);
    } else {
      ++report.rejected;
    }
  }
  return report;
}

double EnvelopeFit::AxMin(double vx0) const {
  return EvalPoly(ax_min_poly, vx0);
}

double EnvelopeFit::AxMax(double vx0) const {
  return EvalPoly(ax_max_poly, vx0);
}

EnvelopeFit EnvelopeFit::Scaled(double factor) const {
  EnvelopeFit out = *this;
  out.alpha *= factor;
  out.beta *= factor;
  out.b *= factor;
  for (double& c : out.ax_min_poly) c *= factor;
  for (double& c : out.ax_max_poly) c *= factor;
  return out;
}

KeyValueConfig EnvelopeFit::ToConfig() const {
  KeyValueConfig c;
  c.Add("alpha", FormatDouble(alpha));
  c.Add("beta", FormatDouble(beta));
  c.Add("a_row0",
        absl::StrCat(FormatDouble(a(0, 0)), " ", FormatDouble(a(0, 1))));
  c.Add("a_row1",
        absl::StrCat(FormatDouble(a(1, 0)), " ", FormatDouble(a(1, 1))));
  c.Add("b", absl::StrCat(FormatDouble(b[0]), " ", FormatDouble(b[1])));
  c.Add("ax_min_poly", absl::StrCat(FormatDouble(ax_min_poly[0]), " ",
                                    FormatDouble(ax_min_poly[1]), " ",
                                    FormatDouble(ax_min_poly[2])));
  c.Add("ax_max_poly", absl::StrCat(FormatDouble(ax_max_poly[0]), " ",
                                    FormatDouble(ax_max_poly[1])));
  c.Add("gamma", FormatDouble(gamma));
  return c;
}

absl::StatusOr<EnvelopeFit> EnvelopeFit::FromConfig(
    const KeyValueConfig& config) {
  EnvelopeFit fit;
  auto need = [&](const char* key, size_t count,
                  std::vector<double>* out) -> absl::Status {
    auto values = config.GetDoubles(key);
    if (!values.ok()) return values.status();
    if (values->size() != count) {
      return absl::InvalidArgumentError(
          absl::StrCat("envelope key `", key, "` expects ", count, " values"));
    }
    *out = *values;
    return absl::OkStatus();
  };
  std::vector<double> v;
  if (auto s = need("alpha", 1, &v); !s.ok()) return s;
  fit.alpha = v[0];
  if (auto s = need("beta", 1, &v); !s.ok()) return s;
  fit.beta = v[0];
  if (auto s = need("a_row0", 2, &v); !s.ok()) return s;
  fit.a.row(0) << v[0], v[1];
  if (auto s = need("a_row1", 2, &v); !s.ok()) return s;
  fit.a.row(1) << v[0], v[1];
  if (auto s = need("b", 2, &v); !s.ok()) return s;
  fit.b << v[0], v[1];
  if (auto s = need("ax_min_poly", 3, &v); !s.ok()) return s;
  std::copy(v.begin(), v.end(), fit.ax_min_poly.begin());
  if (auto s = need("ax_max_poly", 2, &v); !s.ok()) return s;
  std::copy(v.begin(), v.end(), fit.ax_max_poly.begin());
  if (auto s = need("gamma", 1, &v); !s.ok()) return s;
  fit.gamma = v[0];
  if (!(fit.alpha > 0.0) || !(fit.beta > 0.0) || !(fit.b.minCoeff() > 0.0)) {
    return absl::InvalidArgumentError(
        "envelope needs alpha, beta and b positive");
  }
  return fit;
}

absl::StatusOr<EnvelopeFit> EnvelopeFit::ReadFile(const std::string& path) {
  auto config = KeyValueConfig::ReadFile(path);
  if (!config.ok()) return config.status();
  return FromConfig(*config);
}

absl::Status EnvelopeFit::WriteFile(const std::string& path) const {
  return ToConfig().WriteFile(path);
}

bool CheckMembership(const EnvelopeFit& fit, double vx0, double ux, double uy,
                     double upsi, double tolerance) {
  const double ex = ux / fit.alpha;
  const double ey = uy / fit.beta;
  if (ex * ex + ey * ey > 1.0 + tolerance) return false;
  if (ux < fit.AxMin(vx0) - tolerance || ux > fit.AxMax(vx0) + tolerance) {
    return false;
  }
  const Eigen::Vector2d lhs = fit.a * Eigen::Vector2d(ux, uy);
  if ((lhs - fit.b).maxCoeff() > tolerance) return false;
  return std::abs(upsi - fit.gamma * uy) <= 1e-9;
}

double RegionRadius(const EnvelopeFit& fit, double vx0, double dx, double dy) {
  double r = 1.0 / std::hypot(dx / fit.alpha, dy / fit.beta);
  if (dx > 0.0) r = std::min(r, fit.AxMax(vx0) / dx);
  if (dx < 0.0) r = std::min(r, fit.AxMin(vx0) / dx);
  for (int i = 0; i < 2; ++i) {
    const double along = fit.a(i, 0) * dx + fit.a(i, 1) * dy;
    if (along > 0.0) r = std::min(r, fit.b[i] / along);
  }
  return std::max(r, 0.0);
}

std::vector<Point2> ConvexHull(std::vector<Point2> points) {
  std::sort(points.begin(), points.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;
  std::vector<Point2> hull(2 * points.size());
  size_t k = 0;
  for (const Point2& p : points) {
    while (k >= 2 && Cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    const Point2& p = points[i];
    while (k >= lower && Cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

double PolygonArea(std::span<const Point2> poly) {
  double twice = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * twice;
}

Point2 PolygonCentroid(std::span<const Point2> poly) {
  const double area = PolygonArea(poly);
  Point2 c = Point2::Zero();
  for (size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    c += (a + b) * (a.x() * b.y() - a.y() * b.x());
  }
  return c / (6.0 * area);
}

bool PolygonContains(std::span<const Point2> poly, const Point2& p,
                     double tolerance) {
  for (size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    const Point2 edge = b - a;
    // Signed distance, positive outside for a counter-clockwise polygon.
    const double outside =
        (edge.x() * (p.y() - a.y()) - edge.y() * (p.x() - a.x())) /
        -edge.norm();
    if (outside > tolerance) return false;
  }
  return true;
}

double PolygonRayExit(std::span<const Point2> poly, const Point2& origin,
                      const Point2& direction) {
  double t_exit = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    const Point2 normal(b.y() - a.y(), a.x() - b.x());  // outward for CCW
    const double along = normal.dot(direction);
    if (along > 0.0) {
      t_exit = std::min(t_exit, normal.dot(a - origin) / along);
    }
  }
  return t_exit;
}

std::vector<Point2> DilatePolygon(std::span<const Point2> poly, double factor) {
  const Point2 c = PolygonCentroid(poly);
  std::vector<Point2> out;
  out.reserve(poly.size());
  for (const Point2& p : poly) out.push_back(c + factor * (p - c));
  return out;
}

std::vector<Point2> PolytopizeRegion(const EnvelopeFit& fit, double vx0,
                                     double step_deg) {
  std::vector<Point2> boundary;
  const int n = static_cast<int>(std::lround(360.0 / step_deg));
  for (int i = 0; i < n; ++i) {
    const double angle = i * step_deg * std::numbers::pi / 180.0;
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    const double r = RegionRadius(fit, vx0, dx, dy);
    boundary.emplace_back(r * dx, r * dy);
  }
  return boundary;
}

absl::StatusOr<FitReport> FitEnvelope(std::span<const AccelSample> samples) {
  std::map<double, std::vector<Point2>> by_speed;
  for (const AccelSample& s : samples) {
    by_speed[s.vx0].emplace_back(s.ax, s.ay);
  }
  if (by_speed.size() < 3) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least 3 speed groups, got ", by_speed.size()));
  }

  FitReport report;
  std::vector<double> speeds, x_min, x_max;
  for (auto& [vx0, points] : by_speed) {
    SpeedGroup group;
    group.vx0 = vx0;
    group.hull = ConvexHull(points);
    if (group.hull.size() < 3 || PolygonArea(group.hull) < kMinHullArea) {
      return absl::FailedPreconditionError(
          absl::StrCat("degenerate acceleration hull at v_x0 = ", vx0));
    }
    group.dilated = DilatePolygon(group.hull, kHullDilation);
    if (!PolygonContains(group.dilated, Point2::Zero(), 0.0)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "zero acceleration outside the sampled hull at v_x0 = ", vx0));
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Point2& p : group.hull) {
      lo = std::min(lo, p.x());
      hi = std::max(hi, p.x());
    }
    speeds.push_back(vx0);
    x_min.push_back(lo);
    x_max.push_back(hi);
    report.groups.push_back(std::move(group));
  }

  EnvelopeFit fit;
  const auto min_coeffs = FitPolynomial(speeds, x_min, 3);
  const auto max_coeffs = FitPolynomial(speeds, x_max, 2);
  std::copy(min_coeffs.begin(), min_coeffs.end(), fit.ax_min_poly.begin());
  std::copy(max_coeffs.begin(), max_coeffs.end(), fit.ax_max_poly.begin());

  // Ellipse through the friction-limited (braking) side of every hull:
  // least squares on p a_X^2 + q a_Y^2 = 1.
  {
    std::vector<Point2> support;
    for (const SpeedGroup& g : report.groups) {
      for (const Point2& p : g.hull) {
        if (p.x() <= 0.0) support.push_back(p);
      }
    }
    Eigen::MatrixXd m(support.size(), 2);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(support.size());
    for (size_t i = 0; i < support.size(); ++i) {
      m(i, 0) = support[i].x() * support[i].x();
      m(i, 1) = support[i].y() * support[i].y();
    }
    const Eigen::Vector2d pq = m.colPivHouseholderQr().solve(ones);
    if (!(pq[0] > 0.0) || !(pq[1] > 0.0)) {
      return absl::FailedPreconditionError("ellipse fit is not an ellipse");
    }
    fit.alpha = 1.0 / std::sqrt(pq[0]);
    fit.beta = 1.0 / std::sqrt(pq[1]);
  }

  // Symmetric cut of the traction side, c a_X + |a_Y| <= b, fitted to the
  // hull vertices between a quarter of the peak drive acceleration and the
  // peak itself.
  {
    std::vector<double> xs, ys;
    for (size_t g = 0; g < report.groups.size(); ++g) {
      for (const Point2& p : report.groups[g].hull) {
        if (p.x() >= 0.25 * x_max[g] && std::abs(p.y()) > 0.5) {
          xs.push_back(p.x());
          ys.push_back(std::abs(p.y()));
        }
      }
    }
    double slope = 0.0;
    double intercept = fit.beta;
    if (xs.size() >= 2) {
      const auto line = FitPolynomial(xs, ys, 2);
      intercept = line[0];
      slope = std::max(0.0, -line[1]);
    }
    if (!(intercept > 0.0)) {
      return absl::FailedPreconditionError("half-plane fit has no interior");
    }
    fit.a << slope, 1.0, slope, -1.0;
    fit.b << intercept, intercept;
  }

  // Yaw-lateral slope through the origin, fitted on the low-sideslip
  // samples: the full band mixes in rear-axle forces whose yaw moment has
  // the opposite sign.
  {
    double num = 0.0, den = 0.0, yaw_sq = 0.0;
    auto in_band = [](const AccelSample& s) {
      return std::abs(s.vy0) <= kGammaFitSideslipBand * s.vx0;
    };
    for (const AccelSample& s : samples) {
      if (!in_band(s)) continue;
      num += s.apsi * s.ay;
      den += s.ay * s.ay;
      yaw_sq += s.apsi * s.apsi;
    }
    if (!(den > 0.0)) {
      return absl::FailedPreconditionError(
          "no low-sideslip samples to fit the yaw-lateral slope");
    }
    fit.gamma = num / den;
    double residual_sq = 0.0;
    for (const AccelSample& s : samples) {
      if (!in_band(s)) continue;
      const double r = s.apsi - fit.gamma * s.ay;
      residual_sq += r * r;
    }
    report.gamma_residual_ratio =
        yaw_sq > 0.0 ? std::sqrt(residual_sq / yaw_sq) : 0.0;
  }

  // Shrink uniformly until every group's region lies in its dilated hull.
  double factor = 1.0;
  for (const SpeedGroup& g : report.groups) {
    for (int deg = 0; deg < 360; ++deg) {
      const double angle = deg * std::numbers::pi / 180.0;
      const Point2 d(std::cos(angle), std::sin(angle));
      const double region = RegionRadius(fit, g.vx0, d.x(), d.y());
      if (region <= 0.0) continue;
      const double hull = PolygonRayExit(g.dilated, Point2::Zero(), d);
      factor = std::min(factor, hull / region);
    }
  }
  // Guard against round-off on the containment check.
  if (factor < 1.0) factor *= 1.0 - 1e-9;
  report.shrink_factor = factor;
  report.fit = fit.Scaled(factor);
  return report;
}

absl::Status WriteSamplesCsv(const std::string& path,
                             std::span<const AccelSample> samples) {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << "vx0,vy0,ax,ay,apsi\n";
  for (const AccelSample& s : samples) {
    out << absl::StrFormat("%.17g,%.17g,%.17g,%.17g,%.17g\n", s.vx0, s.vy0,
                           s.ax, s.ay, s.apsi);
  }
  return out.good() ? absl::OkStatus()
                    : absl::DataLossError(absl::StrCat("short write ", path));
}

absl::StatusOr<std::vector<AccelSample>> ReadSamplesCsv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("vx0,vy0,ax,ay,apsi", 0) != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": expected header vx0,vy0,ax,ay,apsi"));
  }
  std::vector<AccelSample> samples;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto values = ParseNumberList(line);
    if (!values.ok() || values->size() != 5) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ":", row, ": expected five numbers"));
    }
    const auto& v = *values;
    samples.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  return samples;
}

}  // namespace limitplan
