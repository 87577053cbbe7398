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

#include <doctest.h>

#include <cmath>
#include <random>

#include "dccool/baselines.hpp"
#include "dccool/error.hpp"
#include "dccool/simulator.hpp"

using namespace dccool;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

NormalizationSpec unit_norm(std::size_t ns, std::size_t na, std::size_t nr) {
  NormalizationSpec n;
  n.margin = 0.0;
  n.state.assign(ns, {-1.0, 1.0});
  n.action.assign(na, {-1.0, 1.0});
  n.readings.assign(nr, {-1.0, 1.0});
  return n;
}

// cost(a) = -c a + softplus(a), minimized at a = target.
Critic softplus_bowl(double target) {
  const double c = 1.0 / (1.0 + std::exp(-target));
  MatrixXd w(2, 2);
  w << 0.0, -c, 0.0, 1.0;
  CostParams cost;
  cost.lambda = 1.0;
  cost.phi = 0.0;
  cost.temp_channels = {1};
  nn::Network body({nn::Layer{w, VectorXd::Zero(2), nn::Activation::linear}});
  return Critic(body, cost, unit_norm(1, 1, 2), 1);
}

// Critic whose energy reading ignores the action entirely.
Critic flat_critic(std::size_t na) {
  CostParams cost;
  cost.lambda = 0.0;
  nn::Network body({nn::Layer{MatrixXd::Zero(3, static_cast<nn::Index>(1 + na)),
                              VectorXd::Constant(3, 0.2), nn::Activation::linear}});
  return Critic(body, cost, unit_norm(1, na, 3), 1);
}

// Best of coordinate-wise 1-D grid searches from several random starts.
double coordinate_descent_oracle(const Critic& critic, const VectorXd& xmu, const VectorXd& lo,
                                 const VectorXd& hi, std::uint64_t seed) {
  const BatchObjective f = critic_objective(critic, xmu);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Index dim = lo.size();
  const int steps = 201;
  double best = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 8; ++restart) {
    VectorXd x(dim);
    for (Eigen::Index d = 0; d < dim; ++d) x(d) = lo(d) + u(rng) * (hi(d) - lo(d));
    double fx = f(x)(0);
    for (int sweep = 0; sweep < 30; ++sweep) {
      const double start = fx;
      for (Eigen::Index d = 0; d < dim; ++d) {
        MatrixXd cand = x.replicate(1, steps);
        for (int k = 0; k < steps; ++k) cand(d, k) = lo(d) + (hi(d) - lo(d)) * k / (steps - 1.0);
        const VectorXd c = f(cand);
        Eigen::Index arg = 0;
        if (c.minCoeff(&arg) < fx) {
          fx = c(arg);
          x = cand.col(arg);
        }
      }
      if (fx >= start) break;
    }
    best = std::min(best, fx);
  }
  return best;
}

}  // namespace

TEST_CASE("fixed policy with zero coefficients holds the midpoint") {
  ActionBounds b{{{"u", 16.0, 28.0}, {"v", 7.0, 15.0}}};
  FixedController c;
  c.rules = {SetpointRule{0.0, {0.0, 0.0}, 0.0}, SetpointRule{0.0, {0.0, 0.0}, 0.0}};
  CHECK(fixed_policy(std::vector<double>{30.0, 0.7}, c, b) == std::vector<double>{22.0, 11.0});
  c.rules[0].bias = 100.0;
  CHECK(fixed_policy(std::vector<double>{30.0, 0.7}, c, b)[0] == 28.0);
  c.rules[1].target_coeff = -1.0;
  CHECK_THROWS_AS(c.validate(2, 2), ConfigError);
  CHECK_THROWS_AS(c.validate(3, 2), ConfigError);
}

TEST_CASE("raising the target never lowers a set-point") {
  PlantModel plant;
  FixedController c = tune_fixed_controller(plant, 25.0);
  CHECK_NOTHROW(c.validate(2, kSetpoints));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> amb(20.0, 36.0), load(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> s{amb(rng), load(rng)};
    FixedController warmer = c;
    warmer.target_zone_temp = 25.0 + 3.0 * load(rng);
    const auto a = fixed_policy(s, c, plant.bounds);
    const auto b = fixed_policy(s, warmer, plant.bounds);
    for (std::size_t k = 0; k < kSetpoints; ++k) CHECK(b[k] >= a[k]);
    CHECK(plant.bounds.contains(b));
  }
}

TEST_CASE("tuned fixed controller holds the zones near its target") {
  PlantModel plant;
  ScenarioSpec spec;
  spec.length = 4000;
  const Scenario s = make_scenario(spec);
  for (double target : {26.0, 27.0}) {
    CAPTURE(target);
    FixedController c = tune_fixed_controller(plant, target);
    Controller ctrl = [&](const ControllerInput& in) {
      return fixed_policy(in.state, c, plant.bounds);
    };
    RolloutOptions opt;
    opt.eval_begin = 100;
    RolloutMetrics m = rollout(plant, s, ctrl, CostParams{}, opt);
    for (double t : m.max_temps) CHECK(std::abs(t - target) <= 1.0);
  }
}

TEST_CASE("differential evolution finds an interior 1-D minimum") {
  const Critic bowl = softplus_bowl(0.3);
  DEConfig cfg;
  SearchResult r = ts_optimize(bowl, VectorXd::Zero(1), std::vector<double>{-1.0},
                               std::vector<double>{1.0}, cfg);
  CHECK(std::abs(r.action[0] - 0.3) < 1e-3);

  BatchObjective quad = [](const MatrixXd& x) {
    return ((x.array() - 0.37).square().colwise().sum()).transpose().eval();
  };
  DEResult d = differential_evolution(quad, VectorXd::Constant(3, -2.0), VectorXd::Constant(3, 2.0),
                                      cfg);
  CHECK((d.best.array() - 0.37).abs().maxCoeff() < 1e-3);
}

TEST_CASE("zero generations return the best initial member") {
  std::vector<MatrixXd> seen;
  BatchObjective f = [&](const MatrixXd& x) {
    seen.push_back(x);
    return x.row(0).transpose().eval();
  };
  DEConfig cfg;
  cfg.population = 4;
  cfg.generations = 0;
  DEResult r = differential_evolution(f, VectorXd::Zero(2), VectorXd::Ones(2), cfg);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].cols() == 4);
  Eigen::Index arg = 0;
  const double best = seen[0].row(0).minCoeff(&arg);
  CHECK(r.best_cost == best);
  CHECK(r.best == seen[0].col(arg));
  CHECK(r.evaluations == 4);

  cfg.population = 3;
  CHECK_THROWS_AS(differential_evolution(f, VectorXd::Zero(2), VectorXd::Ones(2), cfg),
                  ConfigError);
  cfg.population = 0;
  cfg.differential_weight = 2.0;
  CHECK_THROWS_AS(differential_evolution(f, VectorXd::Zero(2), VectorXd::Ones(2), cfg),
                  ConfigError);
}

TEST_CASE("differential evolution stays in the box, improves monotonically and repeats") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd lo(4), hi(4), shift(4);
    for (int d = 0; d < 4; ++d) {
      lo(d) = g(rng);
      hi(d) = lo(d) + 0.1 + std::abs(g(rng));
      shift(d) = 3.0 * g(rng);
    }
    bool inside = true;
    BatchObjective rastrigin = [&](const MatrixXd& x) {
      for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index d = 0; d < 4; ++d)
          inside = inside && x(d, j) >= lo(d) && x(d, j) <= hi(d);
      VectorXd v(x.cols());
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const auto z = (x.col(j) - shift).array();
        v(j) = (z.square() - 10.0 * (2.0 * M_PI * z).cos() + 10.0).sum();
      }
      return v;
    };
    DEConfig cfg;
    cfg.seed = rng();
    cfg.generations = 40;
    DEResult a = differential_evolution(rastrigin, lo, hi, cfg);
    DEResult b = differential_evolution(rastrigin, lo, hi, cfg);
    CHECK(inside);
    CHECK(a.best == b.best);
    CHECK(a.best_per_generation.size() == 41);
    for (std::size_t k = 1; k < a.best_per_generation.size(); ++k)
      CHECK(a.best_per_generation[k] <= a.best_per_generation[k - 1]);
  }
}

TEST_CASE("grid oracle") {
  const Critic bowl = softplus_bowl(0.3);
  SearchResult r = grid_oracle(bowl, VectorXd::Zero(1), std::vector<double>{-1.0},
                               std::vector<double>{1.0}, 11);
  CHECK(std::abs(r.action[0] - 0.3) <= 0.2);

  SearchResult corner = grid_oracle(bowl, VectorXd::Zero(1), std::vector<double>{-1.0},
                                    std::vector<double>{1.0}, 2);
  CHECK((corner.action[0] == -1.0 || corner.action[0] == 1.0));

  // ties resolve to the lexicographically smallest point
  const Critic flat = flat_critic(2);
  SearchResult tie = grid_oracle(flat, VectorXd::Zero(1), std::vector<double>{-0.5, 0.0},
                                 std::vector<double>{0.5, 1.0}, 5);
  CHECK(tie.action == std::vector<double>{-0.5, 0.0});

  const Critic wide = flat_critic(5);
  const std::vector<double> lo(5, -1.0), hi(5, 1.0);
  CHECK_THROWS_AS(grid_oracle(wide, VectorXd::Zero(1), lo, hi, 51), ConfigError);
  CHECK_THROWS_AS(grid_oracle(wide, VectorXd::Zero(1), lo, hi, 1), ConfigError);
}

TEST_CASE("DE on a trained plant critic agrees with a coordinate-descent oracle in 5-D") {
  PlantModel plant;
  ScenarioSpec spec;
  spec.length = 3000;
  const Scenario scen = make_scenario(spec);
  const Trace trace = generate_random_trace(plant.bounds, 3000, 3, 5, plant, scen);
  NormalizationSpec norm = fit_normalization(trace.records);
  WindowedDataset all = build_windows(normalize(norm, trace.records), 1);
  auto [tr, va] = split(all, 0.8);
  TrainConfig cfg;
  cfg.max_epoch = 15;
  cfg.seed = 2;
  TrainResult res = train(tr, va, norm, cfg);

  std::vector<double> lo, hi;
  for (const auto& b : plant.bounds.channels) {
    lo.push_back(b.lower);
    hi.push_back(b.upper);
  }
  auto [zlo, zhi] = normalized_box(res.critic, lo, hi);
  DEConfig de;
  int agree = 0;
  for (int k = 0; k < 5; ++k) {
    const VectorXd xmu = va.xmu.col(97 * k);
    SearchResult r = ts_optimize(res.critic, xmu, lo, hi, de);
    const double oracle = coordinate_descent_oracle(res.critic, xmu, zlo, zhi, 100 + k);
    if (r.cost <= oracle + 0.01 * std::abs(oracle)) ++agree;
    CHECK(plant.bounds.contains(r.action));
  }
  CHECK(agree == 5);
}
