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

// Comparison controllers: a fixed-set-point affine rule and a two-stage
// controller that searches actions through a trained critic with
// differential evolution, plus an exhaustive grid search used to check it.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dccool/cca.hpp"
#include "dccool/trace.hpp"

namespace dccool {

struct PlantModel;

// sp_i = clip(mid_i + bias_i + sum_j state_coeffs_ij * s_j + target_coeff_i * target)
struct SetpointRule {
  double bias = 0.0;
  std::vector<double> state_coeffs;
  double target_coeff = 0.0;  // must be >= 0
};

struct FixedController {
  double target_zone_temp = 27.0;
  std::vector<SetpointRule> rules;

  // Throws ConfigError for a dimension mismatch or a negative target_coeff.
  void validate(std::size_t state_dim, std::size_t action_dim) const;
};

std::vector<double> fixed_policy(std::span<const double> state, const FixedController& ctrl,
                                 const ActionBounds& bounds);

// Rule for the surrogate plant: every set-point of a zone sits at the same
// fraction of its range, chosen so the zone settles at the target
// temperature for the current ambient and load.
FixedController tune_fixed_controller(const PlantModel& plant, double target_zone_temp);

struct DEConfig {
  std::size_t population = 0;  // 0 means 15 * dimension
  std::size_t generations = 100;
  double crossover_prob = 0.7;
  double differential_weight = 0.8;
  std::uint64_t seed = 1;

  std::size_t population_for(std::size_t dim) const {
    return population ? population : 15 * dim;
  }
  void validate(std::size_t dim) const;
};

// Evaluates a batch of candidate points, one per column.
using BatchObjective = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct DEResult {
  Eigen::VectorXd best;
  double best_cost = 0.0;
  std::vector<double> best_per_generation;  // index 0 is the initial population
  std::size_t evaluations = 0;
};

// rand/1/bin with greedy selection. Mutants are projected onto the box.
// Dimensions with lower == upper stay fixed.
DEResult differential_evolution(const BatchObjective& f, const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper, const DEConfig& cfg);

// Critic cost of each candidate normalized action given one X_mu column.
BatchObjective critic_objective(const Critic& critic, const Eigen::VectorXd& xmu);

// Physical action box mapped into the critic's normalized action space.
std::pair<Eigen::VectorXd, Eigen::VectorXd> normalized_box(const Critic& critic,
                                                           std::span<const double> lower,
                                                           std::span<const double> upper);

struct SearchResult {
  std::vector<double> action;  // physical, clipped
  double cost = 0.0;
};

SearchResult ts_optimize(const Critic& critic, const Eigen::VectorXd& xmu,
                         std::span<const double> lower, std::span<const double> upper,
                         const DEConfig& cfg);
SearchResult ts_optimize(const Critic& critic, const Eigen::VectorXd& xmu,
                         const ActionBounds& bounds, const DEConfig& cfg);

// Exhaustive search on a regular grid with `resolution` points per free
// axis (fixed axes, lower == upper, contribute one point). Ties go to the
// lexicographically smallest grid point. Throws ConfigError if the grid has
// more than 1e7 points or resolution < 2.
SearchResult grid_oracle(const Critic& critic, const Eigen::VectorXd& xmu,
                         std::span<const double> lower, std::span<const double> upper,
                         std::size_t resolution);

}  // namespace dccool
