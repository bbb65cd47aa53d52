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

// Closed-loop runs: plant at 1 ms, tracking control at 10 ms, replanning at
// the MPC replan period. Solver time is measured but does not advance the
// simulation clock.

#ifndef LIMITPLAN_HARNESS_H_
#define LIMITPLAN_HARNESS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "limitplan/control.h"
#include "limitplan/dynamics.h"
#include "limitplan/envelope.h"
#include "limitplan/planner.h"
#include "limitplan/sqp.h"
#include "limitplan/track.h"

namespace limitplan {

inline constexpr double kPlantStep = 1e-3;          // s
inline constexpr double kCorridorHalfWidth = 50.0;  // m

struct ScenarioConfig {
  std::string name = "scenario";
  VehicleParams vehicle;
  EnvelopeFit envelope;
  std::vector<TrackSegment> segments;  // empty: reference track
  std::vector<Obstacle> obstacles;
  PlannerModel model = PlannerModel::kProposed;
  MpcConfig mpc;
  SqpOptions solver;
  ControllerConfig control;
  double duration = 150.0;  // timeout (s)
  std::uint64_t seed = 0;
  double initial_speed = 0.0;  // m/s before perturbation
  // Seeded initial perturbation amplitudes.
  double lateral_jitter = 0.2;   // m
  double heading_jitter = 0.02;  // rad
  double speed_jitter = 0.3;     // m/s
  // Apply each plan one replan period after it was requested.
  bool strict_realtime = false;
  // Keep every solved plan and write plans.csv.
  bool dump_plans = false;

  absl::Status Validate() const;
  // `vehicle` and `envelope` keys name files relative to the scenario file.
  static absl::StatusOr<ScenarioConfig> FromConfig(
      const KeyValueConfig& config);
  static absl::StatusOr<ScenarioConfig> ReadFile(const std::string& path);
};

struct TraceRow {
  double t = 0.0;
  VehicleState state;
  double s0 = 0.0;
  double lateral_error = 0.0;  // signed, to the dense reference polyline
  double v_max_local = 0.0;    // active window bound
  double v_bound = 0.0;        // sqrt(mu g / kappa) at s0 (inf on straights)
  double v_target = 0.0;
  ControlInput command;
  int sqp_iterations = 0;  // of the active plan
  bool degraded = false;
  bool stale = false;
  std::vector<double> obstacle_distance;  // CoM to center, every obstacle
};

struct ReplanRecord {
  int index = 0;
  double t = 0.0;
  double s0 = 0.0;
  double solve_ms = 0.0;
  int sqp_iterations = 0;
  int qp_iterations = 0;
  bool degraded = false;
  SolveStats::Termination termination = SolveStats::Termination::kIterationCap;
  double v_max = 0.0;
  double kappa_max = 0.0;
  double window_length = 0.0;
  int obstacles = 0;
  double objective = 0.0;
};

struct RunMetrics {
  double rms_lateral_error = 0.0;
  double max_lateral_error = 0.0;
  double average_speed = 0.0;
  bool has_obstacles = false;
  double min_clearance = 0.0;  // min (distance - radius); only with obstacles
  int collision_ticks = 0;
  double max_solve_ms = 0.0;
  double median_solve_ms = 0.0;
  double fraction_over_100ms = 0.0;
  int replans = 0;
  int degraded_replans = 0;
  // max over ticks of v_target / bound - 1 (<= 0 when never exceeded).
  double max_speed_bound_excess = 0.0;
  double max_window_bound_excess = 0.0;
  double max_steer_rate = 0.0;  // |delta_cmd change| / control period
  double sim_time = 0.0;
  bool completed = false;
  std::string status = "ok";
};

struct RunResult {
  ScenarioConfig config;
  RefPath path;
  std::vector<PlacedObstacle> obstacles;
  std::vector<TraceRow> trace;
  std::vector<ReplanRecord> replans;
  std::vector<MpcSolution> plans;  // one per replan when dump_plans is set
  RunMetrics metrics;
};

// Runs to the end of the track or the timeout. Errors are reserved for
// invalid configuration; a vehicle leaving the corridor yields a result with
// completed = false and a diagnostic status.
absl::StatusOr<RunResult> RunScenario(const ScenarioConfig& config);

RunMetrics ComputeMetrics(const RunResult& result);

// trace.csv, replans.csv, metrics.csv, plotdata/*.csv under `dir`.
absl::Status WriteRunOutputs(const std::string& dir, const RunResult& result);
absl::Status WriteTraceCsv(const std::string& path, const RunResult& result);

struct Comparison {
  RunResult a;
  RunResult b;
};

absl::StatusOr<Comparison> Compare(const ScenarioConfig& a,
                                   const ScenarioConfig& b);

// a/ and b/ run outputs plus comparison.csv and plotdata/compare_vs_s.csv.
absl::Status WriteComparison(const std::string& dir, const Comparison& cmp);

// Runs scenarios on up to `threads` workers (0 = hardware concurrency);
// results keep input order.
std::vector<absl::StatusOr<RunResult>> RunBatch(
    std::span<const ScenarioConfig> configs, int threads = 0);

}  // namespace limitplan

#endif  // LIMITPLAN_HARNESS_H_
