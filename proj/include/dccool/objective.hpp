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

// Training cost: energy reading plus a softplus overheating penalty on every
// temperature channel,
//
//   cost(y_r) = y_r[energy] + sum_i lambda * ln(1 + exp(y_r[temp_i] - phi)).
//
// Readings are in physical units (PUE, degC, kW).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace dccool {

// Airflow-driven power for single-action cooling units: the energy term is
// taken from the action instead of a predicted reading.
struct FanLaw {
  std::size_t action_channel = 0;
  double rated_flow = 1.0;   // m3/s
  double rated_power = 1.0;  // kW
};

struct CostParams {
  double lambda = 0.01;
  double phi = 29.0;  // degC
  std::size_t energy_channel = 0;
  std::vector<std::size_t> temp_channels{1, 2};
  std::optional<FanLaw> fan_law;

  // Throws ConfigError if lambda < 0, no temperature channel is given,
  // channels repeat, or any index is >= num_readings.
  void validate(std::size_t num_readings) const;
};

double overheat_penalty(std::span<const double> readings, const CostParams& p);
double cost(std::span<const double> readings, const CostParams& p);
// d cost / d readings: 1 on the energy channel, lambda * sigmoid(T - phi) on
// each temperature channel, zero elsewhere.
std::vector<double> cost_gradient(std::span<const double> readings, const CostParams& p);

// rated_power * (flow / rated_flow)^3
double fan_power(double flow, double rated_flow, double rated_power);
double fan_power_slope(double flow, double rated_flow, double rated_power);

}  // namespace dccool
