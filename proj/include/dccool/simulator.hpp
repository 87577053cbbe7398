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

// Deterministic two-zone data center surrogate.
//
// Zone z is a single lumped thermal mass heated by its IT load and the
// ambient, and cooled by the set-points attached to it:
//
//   T_z' = T_z + (dt / C_z) * (alpha * L_z * A_z + UA_z * (T_amb - T_z)
//                               - sum_{i in z} g_i * max(T_z - sp_i, 0))
//
// Set-points are ordered [T_dec, T_iec, T_cw, T_dx, T_ch]. Zone 1 is served
// by the evaporative coolers and the DX coil (dec, iec, dx); zone 2 by the
// chilled water loop and the chiller air loop (cw, ch). Each cooler draws
//
//   P_i = P0_i * exp(-k_i * (sp_i - L_i)) * max(0.2, 1 + h_i * (T_amb - T_ref))
//
// which is decreasing and convex in its set-point. Evaporative stages are
// cheap but lose efficiency in hot weather (large h); the DX coil and the
// chiller are expensive. Readings are [PUE, T_z1, T_z2] with
// PUE = 1 + (sum_i P_i + overhead) / P_IT.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dccool/objective.hpp"
#include "dccool/trace.hpp"

namespace dccool {

inline constexpr std::size_t kZones = 2;
inline constexpr std::size_t kSetpoints = 5;

struct PlantModel {
  double timestep_minutes = 6.0;
  std::array<double, kZones> area_m2{15.24 * 15.24, 15.24 * 17.00};
  std::array<double, kZones> load_density_kw_m2{4.0, 2.0};
  std::array<double, kZones> ambient_ua{6.0, 6.0};          // kW/degC
  std::array<double, kZones> thermal_mass{23.25, 10.75};     // kWh/degC
  std::array<double, kZones> initial_zone_temps{27.0, 27.0};
  std::array<std::size_t, kSetpoints> zone_of{0, 0, 1, 0, 1};
  std::array<double, kSetpoints> gain{60.0, 60.0, 40.0, 60.0, 40.0};         // kW/degC
  std::array<double, kSetpoints> base_power{10.0, 12.0, 40.0, 1000.0, 700.0};  // kW at L
  std::array<double, kSetpoints> power_decay{0.20, 0.20, 0.08, 0.22, 0.22};   // 1/degC
  std::array<double, kSetpoints> power_reference{16.0, 16.0, 7.0, 16.0, 16.0};  // L_i, degC
  std::array<double, kSetpoints> ambient_sensitivity{0.06, 0.04, 0.01, 0.01, 0.01};
  double reference_ambient = 28.0;
  double overhead_kw = 40.0;
  // PUE uses max(alpha, floor) so an idle hall keeps a finite PUE.
  double load_floor = 0.05;
  double temp_noise_std = 0.0;  // degC, on temperature readings
  double pue_noise_std = 0.0;
  ActionBounds bounds{{{"T_dec", 16.0, 28.0},
                       {"T_iec", 16.0, 28.0},
                       {"T_cw", 7.0, 15.0},
                       {"T_dx", 16.0, 28.0},
                       {"T_ch", 16.0, 28.0}}};

  double it_power_kw(std::size_t zone, double alpha) const;
  double design_it_power_kw() const;
  // Throws ConfigError for non-positive gains, masses or areas, or an
  // explicit thermal update that would be unstable.
  void validate() const;
};

std::vector<std::string> plant_state_names();
std::vector<std::string> plant_reading_names();

struct StepResult {
  std::array<double, kZones> zone_temps{};
  double pue = 0.0;
  double cooling_kw = 0.0;
  std::vector<double> readings;  // [PUE, T_z1, T_z2], noise free
};

double cooling_power_kw(const PlantModel& m, std::span<const double> action, double ambient);

// Noise-free step. Throws DimensionError/Error for a wrong-sized or
// out-of-bounds action.
StepResult plant_step(const PlantModel& m, const std::array<double, kZones>& zone_temps,
                      std::span<const double> action, double ambient, double alpha);

struct Scenario {
  double timestep_minutes = 6.0;
  std::vector<double> ambient;  // degC
  std::vector<double> load;     // alpha in [0, 1]
  std::uint64_t seed = 0;       // measurement noise stream

  std::size_t size() const { return ambient.size(); }
  // Throws ConfigError for unequal lengths or alpha outside [0, 1].
  void validate() const;
};

// Diurnal sinusoid plus AR(1) jitter for the ambient; diurnal and weekly
// cycles plus jitter for the load.
struct ScenarioSpec {
  std::size_t length = 21600;
  double timestep_minutes = 6.0;
  double ambient_mean = 28.5;
  double ambient_amplitude = 3.0;
  double ambient_jitter = 0.3;
  double load_mean = 0.65;
  double load_amplitude = 0.2;
  double load_weekly_amplitude = 0.08;
  double load_jitter = 0.03;
  std::uint64_t seed = 1;
};

Scenario make_scenario(const ScenarioSpec& spec);
// CSV with header t,T_amb,alpha.
Scenario load_scenario_csv(const std::filesystem::path& path, double timestep_minutes);

struct ControllerInput {
  std::size_t step = 0;
  std::span<const TraceRecord> history;  // slots 0..step-1
  std::span<const double> state;         // state of slot `step`
};

using Controller = std::function<std::vector<double>(const ControllerInput&)>;

struct RolloutOptions {
  // Slots before this index are driven by `warmup` and excluded from metrics.
  std::size_t eval_begin = 0;
  Controller warmup;
  // Held for one slot before slot 0 to produce the first readings. Defaults
  // to the midpoint of the bounds.
  std::vector<double> initial_action;
  bool keep_steps = true;
};

struct RolloutStep {
  double t = 0.0;
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> readings;  // produced by `action`, observed at t+1
  double cost = 0.0;
};

struct RolloutMetrics {
  std::size_t steps = 0;
  double mean_pue = 0.0;     // mean of the energy channel
  double mean_cost = 0.0;
  std::vector<double> max_temps;  // one per temperature channel
  std::vector<RolloutStep> series;
};

// Full closed-loop record of a simulation, readings as observed (noise
// included).
struct Simulation {
  Trace trace;                          // slot t: (s_t, a_t, r_t)
  std::vector<double> final_readings;   // r_N
};

Simulation simulate(const PlantModel& m, const Scenario& scenario, const Controller& policy,
                    const RolloutOptions& options = {});

// Plays `controller` over the scenario with one-slot action delay and
// aggregates readings of slots eval_begin+1 .. N. Controller exceptions are
// rethrown as Error naming the step.
RolloutMetrics rollout(const PlantModel& m, const Scenario& scenario,
                       const Controller& controller, const CostParams& cost,
                       const RolloutOptions& options = {});

}  // namespace dccool
