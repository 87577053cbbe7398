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

#include "dccool/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dccool/error.hpp"

namespace dccool {

double PlantModel::it_power_kw(std::size_t zone, double alpha) const {
  return alpha * load_density_kw_m2[zone] * area_m2[zone];
}

double PlantModel::design_it_power_kw() const {
  double p = 0.0;
  for (std::size_t z = 0; z < kZones; ++z) p += load_density_kw_m2[z] * area_m2[z];
  return p;
}

void PlantModel::validate() const {
  if (!(timestep_minutes > 0.0)) throw ConfigError("plant.timestep_minutes must be positive");
  bounds.validate();
  if (bounds.size() != kSetpoints)
    throw ConfigError("plant bounds must list " + std::to_string(kSetpoints) + " set-points");
  const double dt = timestep_minutes / 60.0;
  std::array<double, kZones> total_gain{};
  for (std::size_t z = 0; z < kZones; ++z) {
    if (!(area_m2[z] > 0.0) || !(load_density_kw_m2[z] >= 0.0))
      throw ConfigError("plant zone " + std::to_string(z + 1) + ": invalid area or load density");
    if (!(thermal_mass[z] > 0.0))
      throw ConfigError("plant zone " + std::to_string(z + 1) + ": thermal mass must be positive");
    if (!(ambient_ua[z] >= 0.0))
      throw ConfigError("plant zone " + std::to_string(z + 1) + ": ambient coupling must be >= 0");
    total_gain[z] = ambient_ua[z];
  }
  for (std::size_t i = 0; i < kSetpoints; ++i) {
    const std::string& name = bounds.channels[i].name;
    if (zone_of[i] >= kZones) throw ConfigError("plant set-point " + name + ": bad zone");
    if (!(gain[i] > 0.0)) throw ConfigError("plant set-point " + name + ": gain must be positive");
    if (!(base_power[i] > 0.0) || !(power_decay[i] > 0.0))
      throw ConfigError("plant set-point " + name + ": power curve must be positive and decreasing");
    total_gain[zone_of[i]] += gain[i];
  }
  for (std::size_t z = 0; z < kZones; ++z) {
    if (dt / thermal_mass[z] * total_gain[z] > 1.0)
      throw ConfigError("plant zone " + std::to_string(z + 1) +
                        ": thermal mass too small for the timestep (explicit update unstable)");
  }
  if (!(load_floor > 0.0)) throw ConfigError("plant.load_floor must be positive");
  if (!(overhead_kw >= 0.0)) throw ConfigError("plant.overhead_kw must be >= 0");
  if (!(temp_noise_std >= 0.0) || !(pue_noise_std >= 0.0))
    throw ConfigError("plant noise std must be >= 0");
}

std::vector<std::string> plant_state_names() { return {"T_amb", "H_ite"}; }
std::vector<std::string> plant_reading_names() { return {"PUE", "T_z1", "T_z2"}; }

double cooling_power_kw(const PlantModel& m, std::span<const double> action, double ambient) {
  double p = 0.0;
  for (std::size_t i = 0; i < kSetpoints; ++i) {
    const double weather =
        std::max(0.2, 1.0 + m.ambient_sensitivity[i] * (ambient - m.reference_ambient));
    p += m.base_power[i] * std::exp(-m.power_decay[i] * (action[i] - m.power_reference[i])) *
         weather;
  }
  return p;
}

StepResult plant_step(const PlantModel& m, const std::array<double, kZones>& zone_temps,
                      std::span<const double> action, double ambient, double alpha) {
  if (action.size() != kSetpoints)
    throw DimensionError("plant_step: expected " + std::to_string(kSetpoints) +
                         " set-points, got " + std::to_string(action.size()));
  for (std::size_t i = 0; i < kSetpoints; ++i) {
    const auto& b = m.bounds.channels[i];
    if (!(action[i] >= b.lower - 1e-9 && action[i] <= b.upper + 1e-9))
      throw Error("plant_step: set-point " + b.name + " = " + std::to_string(action[i]) +
                  " outside [" + std::to_string(b.lower) + ", " + std::to_string(b.upper) + "]");
  }
  const double dt = m.timestep_minutes / 60.0;
  StepResult r;
  for (std::size_t z = 0; z < kZones; ++z) {
    const double tz = zone_temps[z];
    double heat = m.it_power_kw(z, alpha) + m.ambient_ua[z] * (ambient - tz);
    for (std::size_t i = 0; i < kSetpoints; ++i)
      if (m.zone_of[i] == z) heat -= m.gain[i] * std::max(tz - action[i], 0.0);
    r.zone_temps[z] = tz + dt / m.thermal_mass[z] * heat;
  }
  r.cooling_kw = cooling_power_kw(m, action, ambient);
  const double it = std::max(alpha, m.load_floor) * m.design_it_power_kw();
  r.pue = 1.0 + (r.cooling_kw + m.overhead_kw) / it;
  r.readings = {r.pue, r.zone_temps[0], r.zone_temps[1]};
  return r;
}

void Scenario::validate() const {
  if (!(timestep_minutes > 0.0)) throw ConfigError("scenario timestep must be positive");
  if (ambient.size() != load.size())
    throw ConfigError("scenario ambient and load series differ in length");
  for (std::size_t t = 0; t < load.size(); ++t) {
    if (!(load[t] >= 0.0 && load[t] <= 1.0))
      throw ConfigError("scenario load factor at step " + std::to_string(t) + " outside [0, 1]");
    if (!std::isfinite(ambient[t]))
      throw ConfigError("scenario ambient at step " + std::to_string(t) + " is not finite");
  }
}

Scenario make_scenario(const ScenarioSpec& spec) {
  if (!(spec.timestep_minutes > 0.0)) throw ConfigError("scenario timestep must be positive");
  Scenario s;
  s.timestep_minutes = spec.timestep_minutes;
  s.seed = spec.seed;
  s.ambient.resize(spec.length);
  s.load.resize(spec.length);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double day = 1440.0 / spec.timestep_minutes;
  const double two_pi = 2.0 * std::numbers::pi;
  // AR(1) jitter with unit stationary variance.
  constexpr double kPersistence = 0.9;
  const double innovation = std::sqrt(1.0 - kPersistence * kPersistence);
  double amb_noise = 0.0, load_noise = 0.0;
  for (std::size_t t = 0; t < spec.length; ++t) {
    amb_noise = kPersistence * amb_noise + innovation * gauss(rng);
    load_noise = kPersistence * load_noise + innovation * gauss(rng);
    const double phase = two_pi * static_cast<double>(t) / day;
    s.ambient[t] = spec.ambient_mean + spec.ambient_amplitude * std::sin(phase - 2.0) +
                   spec.ambient_jitter * amb_noise;
    const double a = spec.load_mean + spec.load_amplitude * std::sin(phase - 1.0) +
                     spec.load_weekly_amplitude * std::sin(phase / 7.0) +
                     spec.load_jitter * load_noise;
    s.load[t] = std::clamp(a, 0.0, 1.0);
  }
  return s;
}

Scenario load_scenario_csv(const std::filesystem::path& path, double timestep_minutes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  Scenario s;
  s.timestep_minutes = timestep_minutes;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("t,", 0) == 0) continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw DataError(path.string() + ": line " + std::to_string(lineno) +
                        ": non-numeric cell '" + cell + "'");
      }
    }
    if (v.size() != 3)
      throw DataError(path.string() + ": line " + std::to_string(lineno) +
                      ": expected 3 columns (t,T_amb,alpha)");
    s.ambient.push_back(v[1]);
    s.load.push_back(v[2]);
  }
  s.validate();
  return s;
}

Simulation simulate(const PlantModel& m, const Scenario& scenario, const Controller& policy,
                    const RolloutOptions& options) {
  scenario.validate();
  const std::size_t n = scenario.size();
  if (n == 0) throw ConfigError("scenario is empty");
  if (std::abs(scenario.timestep_minutes - m.timestep_minutes) > 1e-12)
    throw ConfigError("scenario timestep differs from the plant timestep");

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto observe = [&](const StepResult& r) {
    std::vector<double> y = r.readings;
    if (m.pue_noise_std > 0.0) y[0] += m.pue_noise_std * gauss(rng);
    if (m.temp_noise_std > 0.0) {
      y[1] += m.temp_noise_std * gauss(rng);
      y[2] += m.temp_noise_std * gauss(rng);
    }
    return y;
  };

  Simulation sim;
  sim.trace.state_names = plant_state_names();
  for (const auto& b : m.bounds.channels) sim.trace.action_names.push_back(b.name);
  sim.trace.reading_names = plant_reading_names();
  sim.trace.records.reserve(n);

  std::array<double, kZones> temps = m.initial_zone_temps;
  const std::vector<double> init =
      options.initial_action.empty() ? m.bounds.midpoint() : options.initial_action;
  StepResult pre = plant_step(m, temps, init, scenario.ambient[0], scenario.load[0]);
  temps = pre.zone_temps;
  std::vector<double> readings = observe(pre);

  for (std::size_t t = 0; t < n; ++t) {
    TraceRecord rec;
    rec.t = static_cast<double>(t) * scenario.timestep_minutes;
    rec.state = {scenario.ambient[t], scenario.load[t]};
    rec.readings = std::move(readings);
    const Controller& c = (t < options.eval_begin && options.warmup) ? options.warmup : policy;
    try {
      ControllerInput in{t, std::span<const TraceRecord>(sim.trace.records), rec.state};
      rec.action = c(in);
    } catch (const std::exception& e) {
      throw Error("controller failed at step " + std::to_string(t) + ": " + e.what());
    }
    if (rec.action.size() != kSetpoints)
      throw DimensionError("controller returned " + std::to_string(rec.action.size()) +
                           " set-points at step " + std::to_string(t));
    StepResult r = plant_step(m, temps, rec.action, scenario.ambient[t], scenario.load[t]);
    temps = r.zone_temps;
    readings = observe(r);
    sim.trace.records.push_back(std::move(rec));
  }
  sim.final_readings = std::move(readings);
  return sim;
}

RolloutMetrics rollout(const PlantModel& m, const Scenario& scenario,
                       const Controller& controller, const CostParams& cost_params,
                       const RolloutOptions& options) {
  cost_params.validate(plant_reading_names().size());
  if (options.eval_begin >= scenario.size())
    throw ConfigError("rollout: evaluation window is empty");
  Simulation sim = simulate(m, scenario, controller, options);
  const auto& recs = sim.trace.records;

  RolloutMetrics out;
  out.max_temps.assign(cost_params.temp_channels.size(),
                       -std::numeric_limits<double>::infinity());
  double sum_pue = 0.0, c_pue = 0.0, sum_cost = 0.0, c_cost = 0.0;
  // Compensated sums.
  auto kahan = [](double& sum, double& comp, double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  for (std::size_t t = options.eval_begin; t < recs.size(); ++t) {
    const std::vector<double>& y = (t + 1 < recs.size()) ? recs[t + 1].readings
                                                         : sim.final_readings;
    const double c = cost(y, cost_params);
    kahan(sum_pue, c_pue, y[cost_params.energy_channel]);
    kahan(sum_cost, c_cost, c);
    for (std::size_t k = 0; k < cost_params.temp_channels.size(); ++k)
      out.max_temps[k] = std::max(out.max_temps[k], y[cost_params.temp_channels[k]]);
    if (options.keep_steps)
      out.series.push_back({recs[t].t, recs[t].state, recs[t].action, y, c});
    ++out.steps;
  }
  out.mean_pue = sum_pue / static_cast<double>(out.steps);
  out.mean_cost = sum_cost / static_cast<double>(out.steps);
  return out;
}

}  // namespace dccool
