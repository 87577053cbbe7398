// Copyright 2026 The dccool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Experiment workflow behind the command line: trace generation, training,
// closed-loop evaluation, multi-seed comparison and parameter sweeps. Every
// file written goes under ExperimentConfig::output_dir.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dccool/baselines.hpp"
#include "dccool/cca.hpp"
#include "dccool/serialize.hpp"
#include "dccool/simulator.hpp"

namespace dccool {

enum class Mode { two_zone_sim, trace_only };

struct TraceGenSpec {
  std::size_t smoothing_window = 3;
  std::uint64_t seed = 1;
};

struct EvalSpec {
  // Number of test-period slots to evaluate; 0 means all of them.
  std::size_t horizon = 0;
};

struct ExperimentConfig {
  Mode mode = Mode::two_zone_sim;
  std::filesystem::path output_dir = "dccool_out";
  // Input trace for trace_only mode. In two_zone_sim mode the trace lives
  // at output_dir/trace.csv.
  std::filesystem::path trace_path;
  // Optional scenario CSV (t,T_amb,alpha) replacing the generator.
  std::filesystem::path scenario_path;
  TrainConfig train;
  CostParams cost;
  ActionBounds bounds;
  DEConfig de;
  PlantModel plant;
  ScenarioSpec scenario;
  TraceGenSpec trace_gen;
  double train_fraction = 0.55;
  FixedController fixed;  // no rules: tuned from the plant at target_zone_temp
  EvalSpec eval;

  // Throws ConfigError for anything checkable without data.
  void validate() const;
};

ExperimentConfig default_experiment_config();
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Paths of the files each command reads or writes.
std::filesystem::path trace_file(const ExperimentConfig& c);
std::filesystem::path critic_file(const ExperimentConfig& c);
std::filesystem::path actor_file(const ExperimentConfig& c);
std::filesystem::path report_file(const ExperimentConfig& c);

enum class ControllerKind { cca, ts, fixed };
std::string_view to_string(ControllerKind k);
ControllerKind controller_from_string(std::string_view s);

enum class SweepParam { lambda, tau };
SweepParam sweep_param_from_string(std::string_view s);

using ProgressFn = std::function<void(const std::string&)>;

// Each command returns a JSON summary of what it did and wrote.
Json cmd_generate_trace(const ExperimentConfig& c);
Json cmd_train(const ExperimentConfig& c, const ProgressFn& progress = {});
Json cmd_evaluate(const ExperimentConfig& c, ControllerKind kind);
Json cmd_compare(const ExperimentConfig& c, std::size_t runs, const ProgressFn& progress = {});
Json cmd_sweep(const ExperimentConfig& c, SweepParam param, const std::vector<double>& values,
               const ProgressFn& progress = {});

// Windows of a trace split chronologically, normalization fitted on the
// records behind the training windows.
struct PreparedData {
  WindowedDataset train;
  WindowedDataset val;
  NormalizationSpec norm;
  std::size_t eval_begin = 0;  // first slot after the training windows
};
PreparedData prepare_data(const Trace& trace, std::size_t tau, double train_fraction);

Scenario build_scenario(const ExperimentConfig& c);
FixedController resolve_fixed_controller(const ExperimentConfig& c);

}  // namespace dccool
