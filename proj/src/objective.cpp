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

#include "dccool/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dccool/error.hpp"
#include "dccool/nn.hpp"

namespace dccool {

void CostParams::validate(std::size_t num_readings) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ConfigError("cost.lambda must be finite and >= 0");
  if (!std::isfinite(phi)) throw ConfigError("cost.phi must be finite");
  if (temp_channels.empty()) throw ConfigError("cost.temp_channels must not be empty");
  if (energy_channel >= num_readings)
    throw ConfigError("cost.energy_channel " + std::to_string(energy_channel) +
                      " out of range for " + std::to_string(num_readings) + " readings");
  std::vector<std::size_t> seen{energy_channel};
  for (std::size_t c : temp_channels) {
    if (c >= num_readings)
      throw ConfigError("cost.temp_channels entry " + std::to_string(c) +
                        " out of range for " + std::to_string(num_readings) + " readings");
    if (std::find(seen.begin(), seen.end(), c) != seen.end())
      throw ConfigError("cost channel " + std::to_string(c) + " is used twice");
    seen.push_back(c);
  }
  if (fan_law) {
    if (!(fan_law->rated_flow > 0.0) || !(fan_law->rated_power > 0.0))
      throw ConfigError("cost.fan_law rated flow and power must be positive");
  }
}

double overheat_penalty(std::span<const double> readings, const CostParams& p) {
  double s = 0.0;
  for (std::size_t c : p.temp_channels) s += nn::stable_softplus(readings[c] - p.phi);
  return p.lambda * s;
}

double cost(std::span<const double> readings, const CostParams& p) {
  return readings[p.energy_channel] + overheat_penalty(readings, p);
}

std::vector<double> cost_gradient(std::span<const double> readings, const CostParams& p) {
  std::vector<double> g(readings.size(), 0.0);
  g[p.energy_channel] = 1.0;
  for (std::size_t c : p.temp_channels) g[c] = p.lambda * nn::sigmoid(readings[c] - p.phi);
  return g;
}

namespace {
void check_rated(double rated_flow, double rated_power) {
  if (!(rated_flow > 0.0)) throw ConfigError("fan law: rated flow must be positive");
  if (!(rated_power > 0.0)) throw ConfigError("fan law: rated power must be positive");
}
}  // namespace

double fan_power(double flow, double rated_flow, double rated_power) {
  check_rated(rated_flow, rated_power);
  const double r = flow / rated_flow;
  return rated_power * r * r * r;
}

double fan_power_slope(double flow, double rated_flow, double rated_power) {
  check_rated(rated_flow, rated_power);
  const double r = flow / rated_flow;
  return 3.0 * rated_power * r * r / rated_flow;
}

}  // namespace dccool
