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
#include <string>

#include "dccool/error.hpp"
#include "dccool/simulator.hpp"

using namespace dccool;

namespace {

const std::vector<double> kMid{22.0, 22.0, 11.0, 22.0, 22.0};

Scenario constant_scenario(std::size_t n, double ambient, double alpha) {
  Scenario s;
  s.ambient.assign(n, ambient);
  s.load.assign(n, alpha);
  return s;
}

}  // namespace

TEST_CASE("default plant validates") {
  PlantModel m;
  CHECK_NOTHROW(m.validate());
  CHECK(m.design_it_power_kw() == doctest::Approx(4.0 * 15.24 * 15.24 + 2.0 * 15.24 * 17.0));
  m.gain[2] = 0.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = {};
  m.thermal_mass[0] = 0.5;
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("golden step at half load, 30 degC ambient, mid set-points") {
  PlantModel m;
  StepResult r = plant_step(m, {27.0, 27.0}, kMid, 30.0, 0.5);
  CHECK(r.zone_temps[0] == doctest::Approx(25.204366451612902).epsilon(1e-12));
  CHECK(r.zone_temps[1] == doctest::Approx(21.76353488372093).epsilon(1e-12));
  CHECK(r.cooling_kw == doctest::Approx(500.1163464811899).epsilon(1e-12));
  CHECK(r.pue == doctest::Approx(1.7464343965813895).epsilon(1e-12));
  CHECK(r.readings == std::vector<double>{r.pue, r.zone_temps[0], r.zone_temps[1]});
}

TEST_CASE("idle hall at equilibrium") {
  PlantModel m;
  std::vector<double> upper;
  for (const auto& b : m.bounds.channels) upper.push_back(b.upper);
  StepResult r = plant_step(m, {14.0, 14.0}, upper, 14.0, 0.0);
  CHECK(r.zone_temps[0] == 14.0);
  CHECK(r.zone_temps[1] == 14.0);
  const double floor_pue =
      1.0 + (cooling_power_kw(m, upper, 14.0) + m.overhead_kw) /
                (m.load_floor * m.design_it_power_kw());
  CHECK(r.pue == doctest::Approx(floor_pue).epsilon(1e-15));
}

TEST_CASE("lowering one set-point cools at least as much and costs more") {
  PlantModel m;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> temp(20.0, 32.0), amb(22.0, 35.0), load(0.0, 1.0),
      frac(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(kSetpoints);
    for (std::size_t i = 0; i < kSetpoints; ++i) {
      const auto& b = m.bounds.channels[i];
      a[i] = b.lower + frac(rng) * (b.upper - b.lower);
    }
    const std::array<double, kZones> tz{temp(rng), temp(rng)};
    const double ta = amb(rng), al = load(rng);
    const StepResult base = plant_step(m, tz, a, ta, al);
    for (std::size_t i = 0; i < kSetpoints; ++i) {
      auto lower = a;
      lower[i] = m.bounds.channels[i].lower + 0.5 * (a[i] - m.bounds.channels[i].lower);
      if (lower[i] == a[i]) continue;
      const StepResult r = plant_step(m, tz, lower, ta, al);
      CHECK(r.zone_temps[0] <= base.zone_temps[0]);
      CHECK(r.zone_temps[1] <= base.zone_temps[1]);
      CHECK(r.pue > base.pue);
      CHECK(r.pue > 1.0);
    }
  }
}

TEST_CASE("plant is controllable at full load on a hot day") {
  PlantModel m;
  std::vector<double> lower;
  for (const auto& b : m.bounds.channels) lower.push_back(b.lower);
  std::array<double, kZones> tz{35.0, 35.0};
  for (int t = 0; t < 2000; ++t) tz = plant_step(m, tz, lower, 36.0, 1.0).zone_temps;
  CHECK(tz[0] < 29.0);
  CHECK(tz[1] < 29.0);
}

TEST_CASE("one step is Lipschitz in the action") {
  PlantModel m;
  const double dt = m.timestep_minutes / 60.0;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> frac(0.0, 1.0), nudge(-0.5, 0.5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a(kSetpoints), b(kSetpoints);
    double da = 0.0;
    for (std::size_t i = 0; i < kSetpoints; ++i) {
      const auto& c = m.bounds.channels[i];
      a[i] = c.lower + frac(rng) * (c.upper - c.lower);
      b[i] = std::clamp(a[i] + nudge(rng), c.lower, c.upper);
      da = std::max(da, std::abs(a[i] - b[i]));
    }
    const auto ra = plant_step(m, {27.0, 26.0}, a, 29.0, 0.6);
    const auto rb = plant_step(m, {27.0, 26.0}, b, 29.0, 0.6);
    for (std::size_t z = 0; z < kZones; ++z) {
      double g = 0.0;
      for (std::size_t i = 0; i < kSetpoints; ++i)
        if (m.zone_of[i] == z) g += m.gain[i];
      CHECK(std::abs(ra.zone_temps[z] - rb.zone_temps[z]) <= dt / m.thermal_mass[z] * g * da + 1e-12);
    }
  }
}

TEST_CASE("plant_step rejects out-of-bounds and misshapen actions") {
  PlantModel m;
  auto a = kMid;
  a[2] = 20.0;
  CHECK_THROWS_WITH_AS(plant_step(m, {27.0, 27.0}, a, 30.0, 0.5), doctest::Contains("T_cw"), Error);
  CHECK_THROWS_AS(plant_step(m, {27.0, 27.0}, std::vector<double>{22.0}, 30.0, 0.5),
                  DimensionError);
}

TEST_CASE("scenario generator") {
  ScenarioSpec spec;
  spec.length = 2400;
  Scenario a = make_scenario(spec), b = make_scenario(spec);
  CHECK(a.ambient == b.ambient);
  CHECK(a.load == b.load);
  for (double x : a.load) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  double lo = 1e9, hi = -1e9;
  for (double x : a.ambient) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(hi - lo > 4.0);
  spec.seed = 2;
  CHECK(make_scenario(spec).ambient != a.ambient);

  Scenario bad = a;
  bad.load[5] = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = a;
  bad.load.pop_back();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("constant-action rollout equals direct iteration") {
  PlantModel m;
  ScenarioSpec spec;
  spec.length = 300;
  Scenario s = make_scenario(spec);
  CostParams cost;
  Controller hold = [](const ControllerInput&) { return kMid; };
  RolloutOptions opt;
  opt.initial_action = kMid;
  RolloutMetrics r = rollout(m, s, hold, cost, opt);

  std::array<double, kZones> tz = m.initial_zone_temps;
  tz = plant_step(m, tz, kMid, s.ambient[0], s.load[0]).zone_temps;
  double sum_pue = 0.0, sum_cost = 0.0, max1 = -1e9, max2 = -1e9;
  for (std::size_t t = 0; t < s.size(); ++t) {
    StepResult st = plant_step(m, tz, kMid, s.ambient[t], s.load[t]);
    tz = st.zone_temps;
    sum_pue += st.pue;
    sum_cost += dccool::cost(st.readings, cost);
    max1 = std::max(max1, tz[0]);
    max2 = std::max(max2, tz[1]);
  }
  CHECK(r.steps == 300);
  CHECK(r.mean_pue == doctest::Approx(sum_pue / 300).epsilon(1e-12));
  CHECK(r.mean_cost == doctest::Approx(sum_cost / 300).epsilon(1e-12));
  CHECK(r.max_temps[0] == max1);
  CHECK(r.max_temps[1] == max2);
  for (const auto& step : r.series) {
    CHECK(step.readings[1] <= r.max_temps[0]);
    CHECK(step.readings[2] <= r.max_temps[1]);
  }

  RolloutMetrics again = rollout(m, s, hold, cost, opt);
  CHECK(again.mean_cost == r.mean_cost);
  CHECK(again.max_temps == r.max_temps);
}

TEST_CASE("noisy rollouts repeat with the scenario seed") {
  PlantModel m;
  m.temp_noise_std = 0.2;
  m.pue_noise_std = 0.01;
  ScenarioSpec spec;
  spec.length = 200;
  Scenario s = make_scenario(spec);
  Controller hold = [](const ControllerInput&) { return kMid; };
  auto a = simulate(m, s, hold), b = simulate(m, s, hold);
  CHECK(a.trace.records[150].readings == b.trace.records[150].readings);
  s.seed = 9;
  auto c = simulate(m, s, hold);
  CHECK(c.trace.records[150].readings != a.trace.records[150].readings);
}

TEST_CASE("controller failures name the step") {
  PlantModel m;
  Scenario s = constant_scenario(20, 30.0, 0.5);
  Controller boom = [](const ControllerInput& in) -> std::vector<double> {
    if (in.step == 7) throw std::runtime_error("sensor lost");
    return kMid;
  };
  CHECK_THROWS_WITH(simulate(m, s, boom), doctest::Contains("step 7"));
}

TEST_CASE("warmup drives the slots before the evaluation window") {
  PlantModel m;
  Scenario s = constant_scenario(30, 30.0, 0.5);
  std::vector<double> cold{16.0, 16.0, 7.0, 16.0, 16.0};
  RolloutOptions opt;
  opt.eval_begin = 10;
  opt.warmup = [&](const ControllerInput&) { return cold; };
  Controller hold = [](const ControllerInput&) { return kMid; };
  RolloutMetrics r = rollout(m, s, hold, CostParams{}, opt);
  CHECK(r.steps == 20);
  CHECK(r.series.front().action == kMid);
  CHECK(r.series.front().t == 60.0);
}

TEST_CASE("an action change first shows in the next slot's readings") {
  PlantModel m;
  Scenario s = constant_scenario(40, 30.0, 0.6);
  const std::size_t t0 = 20;
  std::vector<double> cold{16.0, 16.0, 7.0, 16.0, 16.0};
  Controller base = [](const ControllerInput&) { return kMid; };
  Controller pulse = [&](const ControllerInput& in) { return in.step == t0 ? cold : kMid; };
  const Trace a = simulate(m, s, base).trace;
  const Trace b = simulate(m, s, pulse).trace;
  for (std::size_t t = 0; t <= t0; ++t) CHECK(a.records[t].readings == b.records[t].readings);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.records[t0 + 1].readings[i] != b.records[t0 + 1].readings[i]);

  for (std::size_t tau : {1u, 3u, 4u}) {
    CAPTURE(tau);
    const WindowedDataset wa = build_windows(a.records, tau);
    const WindowedDataset wb = build_windows(b.records, tau);
    const Eigen::Index last_action = static_cast<Eigen::Index>((tau - 1) * 7 + 2);
    for (Eigen::Index k = 0; k < wa.rows(); ++k) {
      const std::size_t target = static_cast<std::size_t>(k) + tau;
      const bool pulse_is_last = wb.xq(last_action, k) == 16.0;
      CHECK(pulse_is_last == (target == t0 + 1));
      if (target <= t0) CHECK(wa.yr.col(k) == wb.yr.col(k));
      if (target == t0 + 1) CHECK(wb.yr(1, k) < wa.yr(1, k));
    }
  }
}
