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
#include <vector>

#include "dccool/error.hpp"
#include "dccool/objective.hpp"

using namespace dccool;

TEST_CASE("cost on the reference readings") {
  CostParams p;  // lambda 0.01, phi 29, energy 0, temps {1, 2}
  const std::vector<double> at_phi{1.3, 29.0, 29.0};
  CHECK(cost(at_phi, p) == doctest::Approx(1.3 + 2 * 0.01 * std::log(2.0)).epsilon(1e-15));
  CHECK(cost(at_phi, p) == doctest::Approx(1.313863).epsilon(1e-6));

  const std::vector<double> cold{1.3, -100.0, -100.0};
  CHECK(std::abs(cost(cold, p) - 1.3) < 1e-9);

  p.lambda = 0.0;
  const std::vector<double> hot{1.7, 80.0, 45.0};
  CHECK(cost(hot, p) == 1.7);
}

TEST_CASE("cost gradient closed form") {
  CostParams p;
  const std::vector<double> y{1.2, 29.0, 25.0};
  auto g = cost_gradient(y, p);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(g[2] < 0.005);
  p.lambda = 0.0;
  g = cost_gradient(y, p);
  CHECK(g == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("cost gradient matches central differences on random readings") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> energy(1.0, 2.0), temp(15.0, 45.0), lam(0.001, 0.1);
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    CostParams p;
    p.lambda = lam(rng);
    std::vector<double> y{energy(rng), temp(rng), temp(rng)};
    const auto g = cost_gradient(y, p);
    for (std::size_t k = 0; k < y.size(); ++k) {
      // Difference only the term that depends on channel k so cancellation
      // against the other terms does not swamp small gradients.
      CostParams q = p;
      std::vector<double> z = y;
      if (k == p.energy_channel) {
        q.temp_channels = {1};
        q.lambda = 0.0;
      } else {
        q.temp_channels = {k};
        z[p.energy_channel] = 0.0;
      }
      const double keep = z[k];
      z[k] = keep + h;
      const double up = cost(z, q);
      z[k] = keep - h;
      const double down = cost(z, q);
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[k]) / std::abs(g[k]));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("cost is monotone and bounded below by the energy reading") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> temp(0.0, 60.0), step(0.0, 3.0);
  CostParams p;
  p.lambda = 0.02;
  for (int i = 0; i < 500; ++i) {
    std::vector<double> y{1.4, temp(rng), temp(rng)};
    const double c = cost(y, p);
    CHECK(c > y[0]);
    auto hotter = y;
    hotter[1] += step(rng);
    CHECK(cost(hotter, p) >= c);
    auto pricier = y;
    pricier[0] += 1e-3;
    CHECK(cost(pricier, p) > c);
  }
}

TEST_CASE("cost params validation") {
  CostParams p;
  CHECK_NOTHROW(p.validate(3));
  p.lambda = -0.1;
  CHECK_THROWS_AS(p.validate(3), ConfigError);
  p = {};
  p.temp_channels = {};
  CHECK_THROWS_AS(p.validate(3), ConfigError);
  p = {};
  p.temp_channels = {1, 1};
  CHECK_THROWS_AS(p.validate(3), ConfigError);
  p = {};
  p.temp_channels = {0};
  CHECK_THROWS_AS(p.validate(3), ConfigError);
  p = {};
  p.temp_channels = {3};
  CHECK_THROWS_AS(p.validate(3), ConfigError);
  p = {};
  p.fan_law = FanLaw{0, 0.0, 1.0};
  CHECK_THROWS_AS(p.validate(3), ConfigError);
}

TEST_CASE("fan law") {
  CHECK(fan_power(2.0, 2.0, 15.0) == 15.0);
  CHECK(fan_power(1.0, 2.0, 16.0) == 2.0);
  CHECK(fan_power(0.0, 2.0, 16.0) == 0.0);
  CHECK_THROWS_AS(fan_power(1.0, 0.0, 16.0), ConfigError);
  CHECK_THROWS_AS(fan_power(1.0, 2.0, -1.0), ConfigError);
  // increasing with increasing slope
  double prev = fan_power(0.1, 2.0, 16.0), prev_slope = fan_power_slope(0.1, 2.0, 16.0);
  for (double f = 0.2; f < 4.0; f += 0.1) {
    CHECK(fan_power(f, 2.0, 16.0) > prev);
    CHECK(fan_power_slope(f, 2.0, 16.0) > prev_slope);
    prev = fan_power(f, 2.0, 16.0);
    prev_slope = fan_power_slope(f, 2.0, 16.0);
  }
  const double h = 1e-6;
  CHECK(fan_power_slope(1.3, 2.0, 16.0) ==
        doctest::Approx((fan_power(1.3 + h, 2.0, 16.0) - fan_power(1.3 - h, 2.0, 16.0)) / (2 * h))
            .epsilon(1e-8));
}
