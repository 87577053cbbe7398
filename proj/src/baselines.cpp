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

#include "dccool/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dccool/error.hpp"
#include "dccool/simulator.hpp"

namespace dccool {

void FixedController::validate(std::size_t state_dim, std::size_t action_dim) const {
  if (rules.size() != action_dim)
    throw ConfigError("fixed controller has " + std::to_string(rules.size()) +
                      " rules for " + std::to_string(action_dim) + " action channels");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].state_coeffs.size() != state_dim)
      throw ConfigError("fixed controller rule " + std::to_string(i) + " needs " +
                        std::to_string(state_dim) + " state coefficients");
    if (!(rules[i].target_coeff >= 0.0))
      throw ConfigError("fixed controller rule " + std::to_string(i) +
                        ": target coefficient must be >= 0");
  }
  if (!std::isfinite(target_zone_temp)) throw ConfigError("fixed controller target is not finite");
}

std::vector<double> fixed_policy(std::span<const double> state, const FixedController& ctrl,
                                 const ActionBounds& bounds) {
  if (ctrl.rules.size() != bounds.size())
    throw DimensionError("fixed_policy: rule count differs from the action dimension");
  std::vector<double> a(bounds.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const SetpointRule& r = ctrl.rules[i];
    if (r.state_coeffs.size() != state.size())
      throw DimensionError("fixed_policy: state has " + std::to_string(state.size()) +
                           " channels, rule expects " + std::to_string(r.state_coeffs.size()));
    double v = 0.5 * (bounds.channels[i].lower + bounds.channels[i].upper) + r.bias +
               r.target_coeff * ctrl.target_zone_temp;
    for (std::size_t j = 0; j < state.size(); ++j) v += r.state_coeffs[j] * state[j];
    a[i] = v;
  }
  return bounds.clip(a);
}

FixedController tune_fixed_controller(const PlantModel& plant, double target) {
  plant.validate();
  FixedController c;
  c.target_zone_temp = target;
  c.rules.resize(kSetpoints);
  for (std::size_t z = 0; z < kZones; ++z) {
    // Steady state with every attached cooler active:
    //   (UA + G) T = alpha P + UA T_amb + sum_i g_i (L_i + f R_i)
    double g_total = 0.0, gl = 0.0, gr = 0.0;
    for (std::size_t i = 0; i < kSetpoints; ++i) {
      if (plant.zone_of[i] != z) continue;
      const auto& b = plant.bounds.channels[i];
      g_total += plant.gain[i];
      gl += plant.gain[i] * b.lower;
      gr += plant.gain[i] * (b.upper - b.lower);
    }
    const double ua = plant.ambient_ua[z];
    const double p_design = plant.load_density_kw_m2[z] * plant.area_m2[z];
    for (std::size_t i = 0; i < kSetpoints; ++i) {
      if (plant.zone_of[i] != z) continue;
      const auto& b = plant.bounds.channels[i];
      const double range = b.upper - b.lower;
      SetpointRule& r = c.rules[i];
      r.bias = b.lower - 0.5 * (b.lower + b.upper) - range * gl / gr;
      r.state_coeffs = {-range * ua / gr, -range * p_design / gr};
      r.target_coeff = range * (ua + g_total) / gr;
    }
  }
  return c;
}

void DEConfig::validate(std::size_t dim) const {
  if (population_for(dim) < 4) throw ConfigError("DE population must be >= 4");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0))
    throw ConfigError("DE crossover probability must lie in [0, 1]");
  if (!(differential_weight > 0.0 && differential_weight < 2.0))
    throw ConfigError("DE differential weight must lie in (0, 2)");
}

DEResult differential_evolution(const BatchObjective& f, const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper, const DEConfig& cfg) {
  const Eigen::Index dim = lower.size();
  if (upper.size() != dim || dim == 0) throw DimensionError("DE: bad box dimensions");
  for (Eigen::Index d = 0; d < dim; ++d)
    if (!(lower(d) <= upper(d))) throw ConfigError("DE: lower bound above upper bound");
  cfg.validate(static_cast<std::size_t>(dim));
  const auto np = static_cast<Eigen::Index>(cfg.population_for(static_cast<std::size_t>(dim)));

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Eigen::Index> pick(0, np - 1);
  std::uniform_int_distribution<Eigen::Index> pick_dim(0, dim - 1);

  Eigen::MatrixXd pop(dim, np);
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index d = 0; d < dim; ++d)
      pop(d, i) = lower(d) + unit(rng) * (upper(d) - lower(d));
  Eigen::VectorXd fit = f(pop);
  if (fit.size() != np) throw DimensionError("DE: objective returned the wrong count");

  DEResult res;
  res.evaluations = static_cast<std::size_t>(np);
  Eigen::Index best = 0;
  fit.minCoeff(&best);
  res.best_per_generation.push_back(fit(best));

  Eigen::MatrixXd trial(dim, np);
  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    for (Eigen::Index i = 0; i < np; ++i) {
      Eigen::Index r1, r2, r3;
      do r1 = pick(rng); while (r1 == i);
      do r2 = pick(rng); while (r2 == i || r2 == r1);
      do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const Eigen::Index forced = pick_dim(rng);
      for (Eigen::Index d = 0; d < dim; ++d) {
        double v = pop(d, i);
        if (unit(rng) < cfg.crossover_prob || d == forced)
          v = pop(d, r1) + cfg.differential_weight * (pop(d, r2) - pop(d, r3));
        trial(d, i) = std::clamp(v, lower(d), upper(d));
      }
    }
    const Eigen::VectorXd tfit = f(trial);
    res.evaluations += static_cast<std::size_t>(np);
    for (Eigen::Index i = 0; i < np; ++i) {
      if (tfit(i) <= fit(i)) {
        fit(i) = tfit(i);
        pop.col(i) = trial.col(i);
      }
    }
    fit.minCoeff(&best);
    res.best_per_generation.push_back(fit(best));
  }
  res.best = pop.col(best);
  res.best_cost = fit(best);
  return res;
}

BatchObjective critic_objective(const Critic& critic, const Eigen::VectorXd& xmu) {
  return [&critic, xmu](const Eigen::MatrixXd& actions) {
    Eigen::MatrixXd xq(xmu.size() + actions.rows(), actions.cols());
    xq.topRows(xmu.size()) = xmu.replicate(1, actions.cols());
    xq.bottomRows(actions.rows()) = actions;
    return critic.evaluate(xq);
  };
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> normalized_box(const Critic& critic,
                                                           std::span<const double> lower,
                                                           std::span<const double> upper) {
  const std::size_t na = critic.action_dim();
  if (lower.size() != na || upper.size() != na)
    throw DimensionError("action box does not match the critic's action dimension");
  Eigen::VectorXd lo(static_cast<Eigen::Index>(na)), hi(static_cast<Eigen::Index>(na));
  const NormalizationSpec& n = critic.normalization();
  for (std::size_t i = 0; i < na; ++i) {
    if (!(lower[i] <= upper[i])) throw ConfigError("action box lower bound above upper bound");
    lo(static_cast<Eigen::Index>(i)) = n.normalize(Role::action, i, lower[i]);
    hi(static_cast<Eigen::Index>(i)) = n.normalize(Role::action, i, upper[i]);
  }
  return {lo, hi};
}

namespace {

std::vector<double> to_physical(const Critic& critic, const Eigen::VectorXd& z,
                                std::span<const double> lower, std::span<const double> upper) {
  std::vector<double> a = critic.normalization().denormalize(
      Role::action, std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::clamp(a[i], lower[i], upper[i]);
  return a;
}

std::vector<double> lower_of(const ActionBounds& b) {
  std::vector<double> v;
  for (const auto& c : b.channels) v.push_back(c.lower);
  return v;
}

std::vector<double> upper_of(const ActionBounds& b) {
  std::vector<double> v;
  for (const auto& c : b.channels) v.push_back(c.upper);
  return v;
}

}  // namespace

SearchResult ts_optimize(const Critic& critic, const Eigen::VectorXd& xmu,
                         std::span<const double> lower, std::span<const double> upper,
                         const DEConfig& cfg) {
  if (xmu.size() + static_cast<Eigen::Index>(critic.action_dim()) != critic.body().input_dim())
    throw DimensionError("ts_optimize: X_mu width does not match the critic");
  auto [lo, hi] = normalized_box(critic, lower, upper);
  DEResult r = differential_evolution(critic_objective(critic, xmu), lo, hi, cfg);
  return {to_physical(critic, r.best, lower, upper), r.best_cost};
}

SearchResult ts_optimize(const Critic& critic, const Eigen::VectorXd& xmu,
                         const ActionBounds& bounds, const DEConfig& cfg) {
  return ts_optimize(critic, xmu, lower_of(bounds), upper_of(bounds), cfg);
}

SearchResult grid_oracle(const Critic& critic, const Eigen::VectorXd& xmu,
                         std::span<const double> lower, std::span<const double> upper,
                         std::size_t resolution) {
  if (resolution < 2) throw ConfigError("grid resolution must be >= 2");
  if (xmu.size() + static_cast<Eigen::Index>(critic.action_dim()) != critic.body().input_dim())
    throw DimensionError("grid_oracle: X_mu width does not match the critic");
  auto [lo, hi] = normalized_box(critic, lower, upper);
  const Eigen::Index dim = lo.size();
  std::vector<std::size_t> points(static_cast<std::size_t>(dim));
  double total = 1.0;
  for (Eigen::Index d = 0; d < dim; ++d) {
    points[static_cast<std::size_t>(d)] = lo(d) == hi(d) ? 1 : resolution;
    total *= static_cast<double>(points[static_cast<std::size_t>(d)]);
  }
  if (total > 1e7) throw ConfigError("grid oracle budget exceeded (more than 1e7 points)");
  const auto count = static_cast<std::size_t>(total);

  auto coord = [&](Eigen::Index d, std::size_t k) {
    const std::size_t p = points[static_cast<std::size_t>(d)];
    if (p == 1) return lo(d);
    return lo(d) + (hi(d) - lo(d)) * static_cast<double>(k) / static_cast<double>(p - 1);
  };

  const BatchObjective f = critic_objective(critic, xmu);
  constexpr std::size_t kChunk = 4096;
  std::vector<std::size_t> digits(static_cast<std::size_t>(dim), 0);  // last axis fastest
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best(dim);
  for (std::size_t start = 0; start < count; start += kChunk) {
    const std::size_t len = std::min(kChunk, count - start);
    Eigen::MatrixXd cand(dim, static_cast<Eigen::Index>(len));
    for (std::size_t j = 0; j < len; ++j) {
      for (Eigen::Index d = 0; d < dim; ++d)
        cand(d, static_cast<Eigen::Index>(j)) = coord(d, digits[static_cast<std::size_t>(d)]);
      for (Eigen::Index d = dim - 1; d >= 0; --d) {
        auto& k = digits[static_cast<std::size_t>(d)];
        if (++k < points[static_cast<std::size_t>(d)]) break;
        k = 0;
      }
    }
    const Eigen::VectorXd c = f(cand);
    for (Eigen::Index j = 0; j < c.size(); ++j)
      if (c(j) < best_cost) {
        best_cost = c(j);
        best = cand.col(j);
      }
  }
  return {to_physical(critic, best, lower, upper), best_cost};
}

}  // namespace dccool
