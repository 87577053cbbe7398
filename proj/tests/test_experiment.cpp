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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dccool/error.hpp"
#include "dccool/experiment.hpp"

using namespace dccool;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("dccool_exp_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig tiny(const std::string& name) {
  ExperimentConfig c = default_experiment_config();
  c.output_dir = fresh_dir(name);
  c.scenario.length = 600;
  c.train.max_epoch = 2;
  c.eval.horizon = 10;
  c.de.generations = 3;
  return c;
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(e.path());
  return out;
}

}  // namespace

TEST_CASE("default config survives a JSON round trip") {
  const ExperimentConfig c = default_experiment_config();
  const Json j = to_json(c);
  CHECK(to_json(experiment_config_from_json(j)) == j);
  CHECK(c.train.max_epoch == 200);
  CHECK(c.train.batch_size == 128);
  CHECK(c.train.critic_hidden == std::vector<nn::Index>{50, 50});
  CHECK(c.cost.lambda == 0.01);
  CHECK(c.cost.phi == 29.0);
}

TEST_CASE("partial configs keep defaults; unknown keys are rejected by name") {
  Json j = Json::parse(R"({"train": {"max_epoch": 7}, "cost": {"lambda": 0.02}})");
  const ExperimentConfig c = experiment_config_from_json(j);
  CHECK(c.train.max_epoch == 7);
  CHECK(c.train.batch_size == 128);
  CHECK(c.cost.lambda == 0.02);

  j["train"]["learning_rate"] = 0.1;
  try {
    experiment_config_from_json(j);
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("learning_rate") != std::string::npos);
  }
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"trainn": {}})")), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"mode": "cfd"})")), ConfigError);
}

TEST_CASE("an inverted bound is reported with its channel name") {
  Json j = to_json(default_experiment_config());
  j["bounds"][2]["lower"] = 20.0;
  try {
    experiment_config_from_json(j).validate();
    FAIL("inverted bound accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("T_cw") != std::string::npos);
  }
}

TEST_CASE("config file load errors") {
  const fs::path dir = fresh_dir("cfgload");
  fs::create_directories(dir);
  CHECK_THROWS_AS(load_experiment_config(dir / "nope.json"), ConfigError);
  std::ofstream(dir / "c.json") << R"({"train": {"tau": 3}})";
  CHECK(load_experiment_config(dir / "c.json").train.tau == 3);
  fs::remove_all(dir);
}

TEST_CASE("generate-trace is byte-identical for the same seed") {
  ExperimentConfig a = tiny("gen_a"), b = tiny("gen_b");
  a.scenario.length = b.scenario.length = 1000;
  cmd_generate_trace(a);
  cmd_generate_trace(b);
  const std::string ta = slurp(trace_file(a));
  CHECK(ta == slurp(trace_file(b)));
  CHECK(std::count(ta.begin(), ta.end(), '\n') == 1001);

  ExperimentConfig other = tiny("gen_c");
  other.scenario.length = 1000;
  other.trace_gen.seed = 2;
  cmd_generate_trace(other);
  CHECK(slurp(trace_file(other)) != ta);
  for (const auto* c : {&a, &b, &other}) fs::remove_all(c->output_dir);
}

TEST_CASE("one year at six-minute slots gives 87,600 rows") {
  ExperimentConfig c = tiny("year");
  c.scenario.length = 365 * 24 * 60 / 6;
  CHECK(c.scenario.length == 87600);
  const Json s = cmd_generate_trace(c);
  CHECK(s.at("rows").get<std::size_t>() == 87600);
  CHECK(load_csv(trace_file(c)).records.size() == 87600);
  fs::remove_all(c.output_dir);
}

TEST_CASE("fixed controller evaluates without any checkpoint; cca needs one") {
  ExperimentConfig c = tiny("fixed_only");
  cmd_generate_trace(c);
  const Json m = cmd_evaluate(c, ControllerKind::fixed);
  CHECK(m.at("steps").get<std::size_t>() == 10);
  CHECK_THROWS_AS(cmd_evaluate(c, ControllerKind::cca), IoError);
  fs::remove_all(c.output_dir);
}

TEST_CASE("train, evaluate and rerun: identical metrics, files only under the output dir") {
  ExperimentConfig c = tiny("pipeline");
  cmd_generate_trace(c);
  cmd_train(c);
  cmd_evaluate(c, ControllerKind::cca);
  cmd_evaluate(c, ControllerKind::ts);
  const std::string cca1 = slurp(c.output_dir / "metrics_cca.json");
  const std::string ts1 = slurp(c.output_dir / "metrics_ts.json");
  const std::string critic1 = slurp(critic_file(c));

  cmd_train(c);
  cmd_evaluate(c, ControllerKind::cca);
  cmd_evaluate(c, ControllerKind::ts);
  CHECK(slurp(critic_file(c)) == critic1);
  CHECK(slurp(c.output_dir / "metrics_cca.json") == cca1);
  CHECK(slurp(c.output_dir / "metrics_ts.json") == ts1);

  for (const auto& f : files_under(c.output_dir)) {
    const auto rel = fs::relative(f, c.output_dir);
    CHECK(!rel.empty());
    CHECK(rel.native().rfind("..", 0) != 0);
  }
  fs::remove_all(c.output_dir);
}

TEST_CASE("a single-value sweep writes a single row") {
  ExperimentConfig c = tiny("sweep1");
  const Json s = cmd_sweep(c, SweepParam::lambda, {0.02});
  REQUIRE(s.at("rows").size() == 1);
  CHECK(s.at("rows")[0].at("status") == "ok");
  CHECK(s.at("rows")[0].at("value").get<double>() == 0.02);
  const std::string csv = slurp(c.output_dir / "sweep_lambda.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(s.at("failures").get<std::size_t>() == 0);
  fs::remove_all(c.output_dir);
}

TEST_CASE("a failing sweep value is recorded and the sweep continues") {
  ExperimentConfig c = tiny("sweepfail");
  // A window longer than the trace cannot be built; tau = 2 trains.
  const Json s = cmd_sweep(c, SweepParam::tau, {1000, 2});
  REQUIRE(s.at("rows").size() == 2);
  CHECK(s.at("rows")[0].at("status") != "ok");
  CHECK(s.at("rows")[1].at("status") == "ok");
  CHECK(s.at("failures").get<std::size_t>() == 1);
  CHECK_THROWS_AS(cmd_sweep(c, SweepParam::tau, {0.5}), ConfigError);
  CHECK_THROWS_AS(cmd_sweep(c, SweepParam::lambda, {}), ConfigError);
  fs::remove_all(c.output_dir);
}

TEST_CASE("prepared data splits chronologically behind the training windows") {
  ExperimentConfig c = tiny("prepare");
  cmd_generate_trace(c);
  const Trace t = load_csv(trace_file(c));
  const PreparedData d = prepare_data(t, 3, 0.55);
  CHECK(d.train.rows() + d.val.rows() == static_cast<Eigen::Index>(t.records.size()) - 3);
  CHECK(d.train.rows() == static_cast<Eigen::Index>(split_point(t.records.size() - 3, 0.55)));
  CHECK(d.val.t.front() > d.train.t.back());
  CHECK(d.eval_begin > 0);
  CHECK(d.eval_begin < t.records.size());
  fs::remove_all(c.output_dir);
}
