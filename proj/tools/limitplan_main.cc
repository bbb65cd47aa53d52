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

// limitplan command line: simulate, compare, envelope sample|fit,
// track export.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "limitplan/envelope.h"
#include "limitplan/harness.h"
#include "limitplan/track.h"

namespace limitplan {
namespace {

int Fail(const absl::Status& status) {
  std::fprintf(stderr, "error: %s\n", std::string(status.message()).c_str());
  return 2;
}

void PrintMetrics(const RunResult& r) {
  const RunMetrics& m = r.metrics;
  absl::PrintF("%s (%s): %s\n", r.config.name, PlannerModelName(r.config.model),
               m.completed ? "completed" : m.status);
  absl::PrintF("  lateral error rms %.3f m, max %.3f m\n", m.rms_lateral_error,
               m.max_lateral_error);
  absl::PrintF("  average speed %.2f m/s over %.1f s\n", m.average_speed,
               m.sim_time);
  if (m.has_obstacles) {
    absl::PrintF("  min clearance %.3f m, collision ticks %d\n",
                 m.min_clearance, m.collision_ticks);
  }
  absl::PrintF("  solve ms median %.2f, max %.2f, >100 ms %.1f%%\n",
               m.median_solve_ms, m.max_solve_ms,
               100.0 * m.fraction_over_100ms);
}

int Simulate(const std::string& scenario, const std::string& out_dir,
             const std::vector<std::uint64_t>& seeds) {
  auto config = ScenarioConfig::ReadFile(scenario);
  if (!config.ok()) return Fail(config.status());
  if (seeds.size() <= 1) {
    if (!seeds.empty()) config->seed = seeds.front();
    auto result = RunScenario(*config);
    if (!result.ok()) return Fail(result.status());
    if (auto s = WriteRunOutputs(out_dir, *result); !s.ok()) return Fail(s);
    PrintMetrics(*result);
    return result->metrics.completed ? 0 : 1;
  }
  std::vector<ScenarioConfig> batch;
  for (std::uint64_t seed : seeds) {
    batch.push_back(*config);
    batch.back().seed = seed;
  }
  int code = 0;
  const auto results = RunBatch(batch);
  for (size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok()) return Fail(results[i].status());
    const std::string dir = absl::StrFormat("%s/seed_%d", out_dir, seeds[i]);
    if (auto s = WriteRunOutputs(dir, *results[i]); !s.ok()) return Fail(s);
    PrintMetrics(*results[i]);
    if (!results[i]->metrics.completed) code = 1;
  }
  return code;
}

int CompareCommand(const std::string& a, const std::string& b,
                   const std::string& out_dir) {
  auto ca = ScenarioConfig::ReadFile(a);
  if (!ca.ok()) return Fail(ca.status());
  auto cb = ScenarioConfig::ReadFile(b);
  if (!cb.ok()) return Fail(cb.status());
  auto cmp = Compare(*ca, *cb);
  if (!cmp.ok()) return Fail(cmp.status());
  if (auto s = WriteComparison(out_dir, *cmp); !s.ok()) return Fail(s);
  PrintMetrics(cmp->a);
  PrintMetrics(cmp->b);
  return cmp->a.metrics.completed && cmp->b.metrics.completed ? 0 : 1;
}

int EnvelopeSample(const std::string& params_file,
                   const std::vector<double>& vx, int n, std::uint64_t seed,
                   const std::string& out) {
  auto params = VehicleParams::ReadFile(params_file);
  if (!params.ok()) return Fail(params.status());
  std::vector<AccelSample> all;
  for (size_t i = 0; i < vx.size(); ++i) {
    SamplingOptions options;
    options.n_samples = n;
    options.seed = seed + i;
    auto report = SampleEnvelope(*params, vx[i], options);
    if (!report.ok()) return Fail(report.status());
    absl::PrintF("vx0 %.1f m/s: %d samples, %.1f%% rejected\n", vx[i],
                 report->samples.size(), 100.0 * report->rejection_rate());
    all.insert(all.end(), report->samples.begin(), report->samples.end());
  }
  if (auto s = WriteSamplesCsv(out, all); !s.ok()) return Fail(s);
  return 0;
}

int EnvelopeFitCommand(const std::string& in, const std::string& out) {
  auto samples = ReadSamplesCsv(in);
  if (!samples.ok()) return Fail(samples.status());
  auto report = FitEnvelope(*samples);
  if (!report.ok()) return Fail(report.status());
  const EnvelopeFit& f = report->fit;
  absl::PrintF("alpha %.3f beta %.3f gamma %.3f ax_max(0) %.3f shrink %.3f\n",
               f.alpha, f.beta, f.gamma, f.AxMax(0.0), report->shrink_factor);
  if (auto s = f.WriteFile(out); !s.ok()) return Fail(s);
  return 0;
}

int TrackExport(const std::string& scenario, const std::string& out) {
  auto config = ScenarioConfig::ReadFile(scenario);
  if (!config.ok()) return Fail(config.status());
  absl::StatusOr<RefPath> path = config->segments.empty()
                                     ? BuildReferenceTrack()
                                     : BuildTrack(config->segments);
  if (!path.ok()) return Fail(path.status());
  if (auto s = WritePathCsv(out, *path); !s.ok()) return Fail(s);
  absl::PrintF("%d points, length %.2f m\n", path->points().size(),
               path->length());
  return 0;
}

}  // namespace
}  // namespace limitplan

int main(int argc, char** argv) {
  CLI::App app{"Limit-handling trajectory planning and closed-loop simulation"};
  app.require_subcommand(1);
  int code = 0;

  std::string scenario, out_dir;
  std::vector<std::uint64_t> seeds;
  auto* simulate = app.add_subcommand("simulate", "Run one scenario");
  simulate->add_option("--scenario", scenario, "Scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--out-dir", out_dir, "Output directory")->required();
  simulate->add_option("--seed", seeds,
                       "Override the seed; several seeds run as a batch");
  simulate->callback(
      [&] { code = limitplan::Simulate(scenario, out_dir, seeds); });

  std::string scenario_a, scenario_b;
  auto* compare =
      app.add_subcommand("compare", "Run two scenarios side by side");
  compare->add_option("--scenario-a", scenario_a)
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--scenario-b", scenario_b)
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--out-dir", out_dir)->required();
  compare->callback([&] {
    code = limitplan::CompareCommand(scenario_a, scenario_b, out_dir);
  });

  auto* envelope =
      app.add_subcommand("envelope", "Acceleration envelope tools");
  envelope->require_subcommand(1);
  std::string params, samples_out;
  std::vector<double> vx;
  int n = 5000;
  std::uint64_t seed = 1;
  auto* sample = envelope->add_subcommand("sample", "Sample the plant");
  sample->add_option("--params", params, "Vehicle parameter file")
      ->required()
      ->check(CLI::ExistingFile);
  sample->add_option("--vx", vx, "Initial speeds (m/s)")
      ->required()
      ->delimiter(',');
  sample->add_option("--n", n, "Samples per speed")->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed);
  sample->add_option("--out", samples_out)->required();
  sample->callback([&] {
    code = limitplan::EnvelopeSample(params, vx, n, seed, samples_out);
  });

  std::string fit_in, fit_out;
  auto* fit = envelope->add_subcommand("fit", "Fit the envelope to samples");
  fit->add_option("--in", fit_in)->required()->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out)->required();
  fit->callback([&] { code = limitplan::EnvelopeFitCommand(fit_in, fit_out); });

  auto* track = app.add_subcommand("track", "Track tools");
  track->require_subcommand(1);
  std::string track_scenario, track_out;
  auto* exp = track->add_subcommand("export", "Write the reference polyline");
  exp->add_option("--scenario", track_scenario)
      ->required()
      ->check(CLI::ExistingFile);
  exp->add_option("--out", track_out)->required();
  exp->callback(
      [&] { code = limitplan::TrackExport(track_scenario, track_out); });

  CLI11_PARSE(app, argc, argv);
  return code;
}
