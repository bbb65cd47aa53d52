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

#include "limitplan/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <thread>

#include "absl/status/status.h"
#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "limitplan/sqp.h"

namespace limitplan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string ResolvePath(const std::string& base_dir, const std::string& file) {
  std::filesystem::path p(file);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

const std::set<std::string>& KnownScenarioKeys() {
  static const std::set<std::string> keys = {"name",
                                             "vehicle",
                                             "envelope",
                                             "mu",
                                             "model",
                                             "segment",
                                             "track",
                                             "obstacle",
                                             "duration",
                                             "seed",
                                             "initial_speed",
                                             "lateral_jitter",
                                             "heading_jitter",
                                             "speed_jitter",
                                             "strict_realtime",
                                             "dump_plans",
                                             "mpc.h",
                                             "mpc.horizon_steps",
                                             "mpc.w_v",
                                             "mpc.w_x",
                                             "mpc.w_y",
                                             "mpc.w_o",
                                             "mpc.max_iterations_proposed",
                                             "mpc.max_iterations_kinematic",
                                             "mpc.replan_period",
                                             "control.longitudinal",
                                             "control.lateral",
                                             "control.tau",
                                             "control.delta_rate_max",
                                             "control.dt",
                                             "control.stale_after",
                                             "control.literal_lookahead",
                                             "solver.lambda_initial",
                                             "solver.lambda_min",
                                             "solver.step_tolerance",
                                             "solver.max_qp_failures",
                                             "solver.qp_max_iterations"};
  return keys;
}

std::string FormatValue(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return absl::StrFormat("%.9g", v);
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

absl::Status WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << text;
  return out.good() ? absl::OkStatus()
                    : absl::DataLossError(absl::StrCat("short write ", path));
}

// (s, value) series with s strictly increasing, taken from the trace.
struct Series {
  std::vector<double> s;
  std::vector<double> lateral;
  std::vector<double> speed;
};

Series ProgressSeries(const RunResult& r) {
  Series out;
  for (const TraceRow& row : r.trace) {
    if (!out.s.empty() && row.s0 <= out.s.back()) continue;
    out.s.push_back(row.s0);
    out.lateral.push_back(row.lateral_error);
    out.speed.push_back(row.state.vx);
  }
  return out;
}

double Interpolate(const std::vector<double>& xs, const std::vector<double>& ys,
                   double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const size_t i = it - xs.begin();
  const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

}  // namespace

absl::Status ScenarioConfig::Validate() const {
  if (auto s = vehicle.Validate(); !s.ok()) return s;
  if (auto s = mpc.Validate(); !s.ok()) return s;
  if (auto s = control.Validate(); !s.ok()) return s;
  if (!(duration > 0.0)) return absl::InvalidArgumentError("duration <= 0");
  if (initial_speed < 0.0 || lateral_jitter < 0.0 || heading_jitter < 0.0 ||
      speed_jitter < 0.0) {
    return absl::InvalidArgumentError("initial speed and jitters must be >= 0");
  }
  const double ratio = mpc.replan_period / control.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1) {
    return absl::InvalidArgumentError(
        "replan period must be a multiple of the control period");
  }
  const double plant = control.dt / kPlantStep;
  if (std::abs(plant - std::round(plant)) > 1e-9) {
    return absl::InvalidArgumentError(
        "control period must be a multiple of 1 ms");
  }
  return absl::OkStatus();
}

absl::StatusOr<ScenarioConfig> ScenarioConfig::FromConfig(
    const KeyValueConfig& config) {
  for (const auto& [key, value] : config.entries()) {
    if (!KnownScenarioKeys().contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown scenario key `", key, "`"));
    }
  }
  ScenarioConfig sc;
  sc.name = config.GetStringOr("name", sc.name);
  if (config.Has("vehicle")) {
    auto v = VehicleParams::ReadFile(
        ResolvePath(config.base_dir(), *config.GetString("vehicle")));
    if (!v.ok()) return v.status();
    sc.vehicle = *v;
  }
  if (config.Has("envelope")) {
    auto e = EnvelopeFit::ReadFile(
        ResolvePath(config.base_dir(), *config.GetString("envelope")));
    if (!e.ok()) return e.status();
    sc.envelope = *e;
  }
  if (config.Has("mu")) {
    auto mu = config.GetDouble("mu");
    if (!mu.ok()) return mu.status();
    sc.vehicle.mu = *mu;
  }
  auto model = ParsePlannerModel(config.GetStringOr("model", "proposed"));
  if (!model.ok()) return model.status();
  sc.model = *model;

  const std::string track = config.GetStringOr("track", "reference");
  const auto segments = config.GetAll("segment");
  if (track != "reference" && track != "custom") {
    return absl::InvalidArgumentError("track must be reference or custom");
  }
  if (track == "custom" || !segments.empty()) {
    if (segments.empty()) {
      return absl::InvalidArgumentError("custom track without segments");
    }
    for (const std::string& text : segments) {
      auto seg = TrackSegment::Parse(text);
      if (!seg.ok()) return seg.status();
      sc.segments.push_back(*seg);
    }
  }
  for (const std::string& text : config.GetAll("obstacle")) {
    auto o = Obstacle::Parse(text);
    if (!o.ok()) return o.status();
    sc.obstacles.push_back(*o);
  }
  auto mpc = MpcConfig::FromConfig(config);
  if (!mpc.ok()) return mpc.status();
  sc.mpc = *mpc;
  auto control = ControllerConfig::FromConfig(config);
  if (!control.ok()) return control.status();
  sc.control = *control;
  sc.control.delta_rate_max =
      std::min(sc.control.delta_rate_max, sc.vehicle.delta_rate_max);

  absl::Status status;
  status.Update(config.Read("duration", &sc.duration));
  status.Update(config.Read("initial_speed", &sc.initial_speed));
  status.Update(config.Read("lateral_jitter", &sc.lateral_jitter));
  status.Update(config.Read("heading_jitter", &sc.heading_jitter));
  status.Update(config.Read("speed_jitter", &sc.speed_jitter));
  status.Update(config.Read("strict_realtime", &sc.strict_realtime));
  status.Update(config.Read("dump_plans", &sc.dump_plans));
  SqpOptions& so = sc.solver;
  status.Update(config.Read("solver.lambda_initial", &so.lambda_initial));
  status.Update(config.Read("solver.lambda_min", &so.lambda_min));
  status.Update(config.Read("solver.step_tolerance", &so.step_tolerance));
  status.Update(config.Read("solver.max_qp_failures", &so.max_qp_failures));
  status.Update(config.Read("solver.qp_max_iterations", &so.qp.max_iterations));
  if (config.Has("seed") &&
      !absl::SimpleAtoi(*config.GetString("seed"), &sc.seed)) {
    status.Update(
        absl::InvalidArgumentError("seed must be a non-negative integer"));
  }
  if (!status.ok()) return status;
  if (!(so.lambda_initial >= 0.0) || !(so.lambda_min >= 0.0) ||
      !(so.step_tolerance >= 0.0) || so.max_qp_failures < 1 ||
      so.qp.max_iterations < 1) {
    return absl::InvalidArgumentError("invalid solver options");
  }
  if (auto s = sc.Validate(); !s.ok()) return s;
  return sc;
}

absl::StatusOr<ScenarioConfig> ScenarioConfig::ReadFile(
    const std::string& path) {
  auto config = KeyValueConfig::ReadFile(path);
  if (!config.ok()) return config.status();
  auto sc = FromConfig(*config);
  if (!sc.ok()) {
    return absl::Status(sc.status().code(),
                        absl::StrCat(path, ": ", sc.status().message()));
  }
  return sc;
}

absl::StatusOr<RunResult> RunScenario(const ScenarioConfig& config) {
  if (auto s = config.Validate(); !s.ok()) return s;
  RunResult result;
  result.config = config;
  if (config.segments.empty()) {
    result.path = BuildReferenceTrack();
  } else {
    auto path = BuildTrack(config.segments);
    if (!path.ok()) return path.status();
    result.path = *std::move(path);
  }
  const RefPath& path = result.path;
  const VehicleParams& vehicle = config.vehicle;
  for (const Obstacle& o : config.obstacles) {
    result.obstacles.push_back(PlaceObstacle(path, o, vehicle.half_width));
  }

  // Seeded start perturbation.
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double lateral = config.lateral_jitter * unit(rng);
  const double heading = config.heading_jitter * unit(rng);
  const double speed =
      config.initial_speed + config.speed_jitter * 0.5 * (1.0 + unit(rng));
  const PathPoint start = path.At(0.0);
  VehicleState state = TrimmedState(vehicle, speed, 0.0, 0.0);
  state.x = start.x - lateral * std::sin(start.heading);
  state.y = start.y + lateral * std::cos(start.heading);
  state.psi = start.heading + heading;

  TrackingController controller(vehicle, config.control);
  SqpSolver solver(config.solver);
  const int plant_steps =
      static_cast<int>(std::lround(config.control.dt / kPlantStep));
  const int replan_every = static_cast<int>(
      std::lround(config.mpc.replan_period / config.control.dt));
  const BicycleGeometry geometry{vehicle.l_front, vehicle.l_rear,
                                 vehicle.delta_max};
  const double horizon = config.mpc.horizon();

  std::optional<MpcSolution> plan;  // applied by the controller
  double plan_time = 0.0;
  std::optional<MpcSolution> pending;  // strict real-time: next to apply
  double pending_time = 0.0;
  std::optional<MpcSolution> latest;  // warm-start source
  double latest_time = 0.0;
  double active_vmax = 0.0;
  RunMetrics& m = result.metrics;

  for (long tick = 0;; ++tick) {
    const double t = tick * config.control.dt;
    auto s0 = Project(path, state.x, state.y);
    if (!s0.ok()) {
      m.completed = false;
      m.status = absl::StrCat("left corridor at t=", FormatValue(t), ": ",
                              s0.status().message());
      break;
    }
    if (*s0 >= path.length() - 1.0) {
      m.completed = true;
      break;
    }
    if (t >= config.duration) {
      m.completed = false;
      m.status = absl::StrCat("timeout at s=", FormatValue(*s0));
      break;
    }

    if (tick % replan_every == 0) {
      if (pending) {
        plan = std::move(pending);
        plan_time = pending_time;
        pending.reset();
      }
      const double vx = state.vx;
      const SpeedCap cap{vx, config.envelope.AxMax(vx), horizon, vehicle.mu};
      auto window = FitAdaptiveWindow(path, *s0, cap);
      if (!window.ok()) return window.status();
      const auto relevant =
          RelevantObstacles(result.obstacles, *s0, vx, horizon);
      std::vector<ObstacleParabola> parabolas;
      for (const PlacedObstacle& o : relevant) parabolas.push_back(o.parabola);
      const PlannerState xi0{state.x,  state.y,       state.psi, state.vx,
                             state.vy, state.psi_dot, *s0};
      const MpcProblem problem =
          BuildProblem(config.model, xi0, *window, config.envelope, parabolas,
                       config.mpc, geometry);
      const Eigen::VectorXd guess =
          latest ? WarmStart(*latest, t - latest_time, problem)
                 : ColdStart(problem);
      MpcSolution sol =
          solver.Solve(problem, guess, config.mpc.max_iterations(config.model));

      ReplanRecord rec;
      rec.index = static_cast<int>(result.replans.size());
      rec.t = t;
      rec.s0 = *s0;
      rec.solve_ms = sol.stats.wall_ms;
      rec.sqp_iterations = sol.stats.sqp_iterations;
      rec.qp_iterations = sol.stats.qp_iterations;
      rec.degraded = sol.stats.degraded;
      rec.termination = sol.stats.termination;
      rec.v_max = window->v_max;
      rec.kappa_max = window->kappa_max;
      rec.window_length = window->length;
      rec.obstacles = static_cast<int>(parabolas.size());
      rec.objective = sol.objective;
      result.replans.push_back(rec);
      if (config.dump_plans) result.plans.push_back(sol);

      // A degraded solve keeps the previous plan when there is one.
      if (!sol.stats.degraded || !latest) {
        latest = sol;
        latest_time = t;
        if (config.strict_realtime) {
          pending = std::move(sol);
          pending_time = t;
        } else {
          plan = std::move(sol);
          plan_time = t;
        }
      }
      if (plan) active_vmax = plan->v_max;
    }

    TrackingCommand cmd = plan ? controller.Track(state, *plan, t - plan_time)
                               : controller.Hold();
    TraceRow row;
    row.t = t;
    row.state = state;
    row.s0 = *s0;
    row.lateral_error = DistanceToPolyline(path, state.x, state.y).lateral;
    row.v_max_local = active_vmax;
    const double kappa = std::abs(path.At(*s0).curvature);
    row.v_bound =
        kappa > 1e-9 ? std::sqrt(vehicle.mu * kGravity / kappa) : kInf;
    row.v_target = cmd.v_target;
    row.command = cmd.input;
    row.sqp_iterations = plan ? plan->stats.sqp_iterations : 0;
    row.degraded = plan ? plan->stats.degraded : false;
    row.stale = cmd.stale;
    for (const PlacedObstacle& o : result.obstacles) {
      row.obstacle_distance.push_back(std::hypot(state.x - o.x, state.y - o.y));
    }
    result.trace.push_back(std::move(row));

    bool failed = false;
    for (int i = 0; i < plant_steps; ++i) {
      auto next = Step(state, cmd.input, vehicle, kPlantStep);
      if (!next.ok()) {
        m.completed = false;
        m.status = absl::StrCat("plant failure at t=", FormatValue(t), ": ",
                                next.status().message());
        failed = true;
        break;
      }
      state = *next;
    }
    if (failed) break;
  }
  const bool completed = m.completed;
  const std::string status = m.status;
  m = ComputeMetrics(result);
  m.completed = completed;
  m.status = status;
  return result;
}

RunMetrics ComputeMetrics(const RunResult& result) {
  RunMetrics m;
  const auto& trace = result.trace;
  m.has_obstacles = !result.obstacles.empty();
  m.min_clearance = m.has_obstacles ? kInf : 0.0;
  double sum_sq = 0.0, sum_v = 0.0;
  for (size_t i = 0; i < trace.size(); ++i) {
    const TraceRow& row = trace[i];
    sum_sq += row.lateral_error * row.lateral_error;
    m.max_lateral_error =
        std::max(m.max_lateral_error, std::abs(row.lateral_error));
    sum_v += row.state.vx;
    for (size_t o = 0; o < result.obstacles.size(); ++o) {
      const double radius = result.obstacles[o].obstacle.radius;
      const double clearance = row.obstacle_distance[o] - radius;
      m.min_clearance = std::min(m.min_clearance, clearance);
      if (clearance <= 0.0) ++m.collision_ticks;
    }
    if (std::isfinite(row.v_bound) && !row.stale) {
      m.max_speed_bound_excess =
          std::max(m.max_speed_bound_excess, row.v_target / row.v_bound - 1.0);
    }
    if (row.v_max_local > 0.0 && !row.stale) {
      m.max_window_bound_excess = std::max(
          m.max_window_bound_excess, row.v_target / row.v_max_local - 1.0);
    }
    if (i > 0) {
      const double dt = row.t - trace[i - 1].t;
      m.max_steer_rate = std::max(
          m.max_steer_rate,
          std::abs(row.command.delta_cmd - trace[i - 1].command.delta_cmd) /
              dt);
    }
  }
  if (!trace.empty()) {
    m.rms_lateral_error = std::sqrt(sum_sq / trace.size());
    m.average_speed = sum_v / trace.size();
    m.sim_time = trace.back().t;
  }
  std::vector<double> solve;
  for (const ReplanRecord& r : result.replans) {
    solve.push_back(r.solve_ms);
    m.max_solve_ms = std::max(m.max_solve_ms, r.solve_ms);
    if (r.solve_ms > 100.0) m.fraction_over_100ms += 1.0;
    if (r.degraded) ++m.degraded_replans;
  }
  m.replans = static_cast<int>(result.replans.size());
  if (m.replans > 0) m.fraction_over_100ms /= m.replans;
  m.median_solve_ms = Median(solve);
  m.completed = result.metrics.completed;
  m.status = result.metrics.status;
  return m;
}

absl::Status WriteTraceCsv(const std::string& path, const RunResult& result) {
  std::string out =
      "t,x,y,psi,theta,phi,vx,vy,psi_dot,theta_dot,phi_dot,omega_fl,omega_fr,"
      "omega_rl,omega_rr,delta,s0,lateral_error,v_max_local,v_bound,v_target,"
      "torque_fl,torque_fr,torque_rl,torque_rr,delta_cmd,sqp_iterations,"
      "degraded,stale";
  for (size_t o = 0; o < result.obstacles.size(); ++o) {
    absl::StrAppend(&out, ",obstacle_distance_", o);
  }
  out += "\n";
  for (const TraceRow& r : result.trace) {
    const VehicleState& s = r.state;
    absl::StrAppend(&out, FormatValue(r.t));
    for (double v : {s.x,
                     s.y,
                     s.psi,
                     s.theta,
                     s.phi,
                     s.vx,
                     s.vy,
                     s.psi_dot,
                     s.theta_dot,
                     s.phi_dot,
                     s.omega[0],
                     s.omega[1],
                     s.omega[2],
                     s.omega[3],
                     s.delta,
                     r.s0,
                     r.lateral_error,
                     r.v_max_local,
                     r.v_bound,
                     r.v_target,
                     r.command.torque[0],
                     r.command.torque[1],
                     r.command.torque[2],
                     r.command.torque[3],
                     r.command.delta_cmd}) {
      absl::StrAppend(&out, ",", FormatValue(v));
    }
    absl::StrAppend(&out, ",", r.sqp_iterations, ",", r.degraded ? 1 : 0, ",",
                    r.stale ? 1 : 0);
    for (double d : r.obstacle_distance)
      absl::StrAppend(&out, ",", FormatValue(d));
    out += "\n";
  }
  return WriteFile(path, out);
}

absl::Status WriteRunOutputs(const std::string& dir, const RunResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "plotdata", ec);
  if (ec)
    return absl::UnavailableError(
        absl::StrCat("mkdir ", dir, ": ", ec.message()));
  if (auto s = WriteTraceCsv((fs::path(dir) / "trace.csv").string(), result);
      !s.ok()) {
    return s;
  }

  std::string replans =
      "index,t,s0,solve_ms,sqp_iterations,qp_iterations,degraded,termination,"
      "v_max,kappa_max,window_length,obstacles,objective\n";
  for (const ReplanRecord& r : result.replans) {
    absl::StrAppend(&replans, r.index, ",", FormatValue(r.t), ",",
                    FormatValue(r.s0), ",", FormatValue(r.solve_ms), ",",
                    r.sqp_iterations, ",", r.qp_iterations, ",",
                    r.degraded ? 1 : 0, ",", TerminationName(r.termination),
                    ",", FormatValue(r.v_max), ",", FormatValue(r.kappa_max),
                    ",", FormatValue(r.window_length), ",", r.obstacles, ",",
                    FormatValue(r.objective), "\n");
  }
  if (auto s = WriteFile((fs::path(dir) / "replans.csv").string(), replans);
      !s.ok()) {
    return s;
  }

  if (!result.plans.empty()) {
    std::string plans =
        "replan,node,x,y,psi,vx,vy,vpsi,s,control_0,control_1,v_tol,x_tol,"
        "y_tol,o_tol_max\n";
    for (size_t i = 0; i < result.plans.size(); ++i) {
      const MpcSolution& p = result.plans[i];
      for (size_t k = 0; k < p.states.size(); ++k) {
        const PlannerState& x = p.states[k];
        const bool has_control = k < p.controls.size();
        double o_tol = 0.0;
        if (k < p.obstacle_slacks.size()) {
          for (double o : p.obstacle_slacks[k]) o_tol = std::max(o_tol, o);
        }
        const auto& tol = p.tracking_slacks[k];
        absl::StrAppend(&plans, i, ",", k, ",", FormatValue(x.x), ",",
                        FormatValue(x.y), ",", FormatValue(x.psi), ",",
                        FormatValue(x.vx), ",", FormatValue(x.vy), ",",
                        FormatValue(x.vpsi), ",", FormatValue(x.s), ",",
                        has_control ? FormatValue(p.controls[k](0)) : "", ",",
                        has_control ? FormatValue(p.controls[k](1)) : "", ",",
                        FormatValue(tol[0]), ",", FormatValue(tol[1]), ",",
                        FormatValue(tol[2]), ",", FormatValue(o_tol), "\n");
      }
    }
    if (auto s = WriteFile((fs::path(dir) / "plans.csv").string(), plans);
        !s.ok()) {
      return s;
    }
  }

  const RunMetrics& m = result.metrics;
  std::string metrics = "metric,value\n";
  auto add = [&](const char* key, const std::string& value) {
    absl::StrAppend(&metrics, key, ",", value, "\n");
  };
  add("scenario", result.config.name);
  add("model", PlannerModelName(result.config.model));
  add("seed", absl::StrCat(result.config.seed));
  add("completed", m.completed ? "1" : "0");
  add("status", absl::StrCat("\"", m.status, "\""));
  add("rms_lateral_error_m", FormatValue(m.rms_lateral_error));
  add("max_lateral_error_m", FormatValue(m.max_lateral_error));
  add("average_speed_mps", FormatValue(m.average_speed));
  if (m.has_obstacles) {
    add("min_clearance_m", FormatValue(m.min_clearance));
    add("collision_ticks", absl::StrCat(m.collision_ticks));
  }
  add("max_solve_ms", FormatValue(m.max_solve_ms));
  add("median_solve_ms", FormatValue(m.median_solve_ms));
  add("fraction_over_100ms", FormatValue(m.fraction_over_100ms));
  add("replans", absl::StrCat(m.replans));
  add("degraded_replans", absl::StrCat(m.degraded_replans));
  add("max_speed_bound_excess", FormatValue(m.max_speed_bound_excess));
  add("max_window_bound_excess", FormatValue(m.max_window_bound_excess));
  add("max_steer_rate_radps", FormatValue(m.max_steer_rate));
  add("sim_time_s", FormatValue(m.sim_time));
  if (auto s = WriteFile((fs::path(dir) / "metrics.csv").string(), metrics);
      !s.ok()) {
    return s;
  }

  std::string speed = "s,vx,v_target,v_max_local,v_bound\n";
  std::string lateral = "s,lateral_error\n";
  for (const TraceRow& r : result.trace) {
    absl::StrAppend(&speed, FormatValue(r.s0), ",", FormatValue(r.state.vx),
                    ",", FormatValue(r.v_target), ",",
                    FormatValue(r.v_max_local), ",", FormatValue(r.v_bound),
                    "\n");
    absl::StrAppend(&lateral, FormatValue(r.s0), ",",
                    FormatValue(r.lateral_error), "\n");
  }
  std::string solve = "replan_index,t,solve_ms\n";
  for (const ReplanRecord& r : result.replans) {
    absl::StrAppend(&solve, r.index, ",", FormatValue(r.t), ",",
                    FormatValue(r.solve_ms), "\n");
  }
  const fs::path plot = fs::path(dir) / "plotdata";
  if (auto s = WriteFile((plot / "speed_vs_s.csv").string(), speed); !s.ok()) {
    return s;
  }
  if (auto s = WriteFile((plot / "lateral_error_vs_s.csv").string(), lateral);
      !s.ok()) {
    return s;
  }
  return WriteFile((plot / "solve_time.csv").string(), solve);
}

absl::StatusOr<Comparison> Compare(const ScenarioConfig& a,
                                   const ScenarioConfig& b) {
  auto ra = RunScenario(a);
  if (!ra.ok()) {
    return absl::Status(ra.status().code(),
                        absl::StrCat("run A: ", ra.status().message()));
  }
  auto rb = RunScenario(b);
  if (!rb.ok()) {
    return absl::Status(rb.status().code(),
                        absl::StrCat("run B: ", rb.status().message()));
  }
  return Comparison{*std::move(ra), *std::move(rb)};
}

absl::Status WriteComparison(const std::string& dir, const Comparison& cmp) {
  namespace fs = std::filesystem;
  if (auto s = WriteRunOutputs((fs::path(dir) / "a").string(), cmp.a);
      !s.ok()) {
    return s;
  }
  if (auto s = WriteRunOutputs((fs::path(dir) / "b").string(), cmp.b);
      !s.ok()) {
    return s;
  }
  const RunMetrics& a = cmp.a.metrics;
  const RunMetrics& b = cmp.b.metrics;
  std::string text = "metric,a,b,b_minus_a\n";
  auto row = [&](const char* key, double va, double vb) {
    absl::StrAppend(&text, key, ",", FormatValue(va), ",", FormatValue(vb), ",",
                    FormatValue(vb - va), "\n");
  };
  row("completed", a.completed, b.completed);
  row("rms_lateral_error_m", a.rms_lateral_error, b.rms_lateral_error);
  row("max_lateral_error_m", a.max_lateral_error, b.max_lateral_error);
  row("average_speed_mps", a.average_speed, b.average_speed);
  if (a.has_obstacles || b.has_obstacles) {
    row("min_clearance_m", a.min_clearance, b.min_clearance);
    row("collision_ticks", a.collision_ticks, b.collision_ticks);
  }
  row("max_solve_ms", a.max_solve_ms, b.max_solve_ms);
  row("median_solve_ms", a.median_solve_ms, b.median_solve_ms);
  row("fraction_over_100ms", a.fraction_over_100ms, b.fraction_over_100ms);
  row("max_sqp_iterations", cmp.a.config.mpc.max_iterations(cmp.a.config.model),
      cmp.b.config.mpc.max_iterations(cmp.b.config.model));
  row("sim_time_s", a.sim_time, b.sim_time);
  if (auto s = WriteFile((fs::path(dir) / "comparison.csv").string(), text);
      !s.ok()) {
    return s;
  }

  const Series sa = ProgressSeries(cmp.a);
  const Series sb = ProgressSeries(cmp.b);
  std::string aligned = "s,lateral_error_a,lateral_error_b,speed_a,speed_b\n";
  if (!sa.s.empty() && !sb.s.empty()) {
    const double lo = std::ceil(std::max(sa.s.front(), sb.s.front()));
    const double hi = std::min(sa.s.back(), sb.s.back());
    for (double s = lo; s <= hi; s += 1.0) {
      absl::StrAppend(&aligned, FormatValue(s), ",",
                      FormatValue(Interpolate(sa.s, sa.lateral, s)), ",",
                      FormatValue(Interpolate(sb.s, sb.lateral, s)), ",",
                      FormatValue(Interpolate(sa.s, sa.speed, s)), ",",
                      FormatValue(Interpolate(sb.s, sb.speed, s)), "\n");
    }
  }
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "plotdata", ec);
  return WriteFile((fs::path(dir) / "plotdata" / "compare_vs_s.csv").string(),
                   aligned);
}

std::vector<absl::StatusOr<RunResult>> RunBatch(
    std::span<const ScenarioConfig> configs, int threads) {
  std::vector<absl::StatusOr<RunResult>> results(configs.size(),
                                                 absl::UnknownError("not run"));
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers =
      std::clamp(workers, 1, std::max(1, static_cast<int>(configs.size())));
  std::atomic<size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < configs.size(); i = next++) {
          results[i] = RunScenario(configs[i]);
        }
      });
    }
  }
  return results;
}

}  // namespace limitplan
