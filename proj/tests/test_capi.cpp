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

// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "dccool/dccool.h"

namespace fs = std::filesystem;

namespace {

struct Config {
  dccool_config* c = nullptr;
  ~Config() { dccool_config_free(c); }
};

std::string take(char* s) {
  std::string r = s ? s : "";
  dccool_string_free(s);
  return r;
}

void count_lines(const char*, void* user) { ++*static_cast<int*>(user); }

}  // namespace

TEST_CASE("version and empty error state") {
  CHECK(std::string(dccool_version()).size() > 0);
  dccool_string_free(nullptr);
}

TEST_CASE("config: default, set, reject, serialize") {
  Config cfg;
  REQUIRE(dccool_config_default(&cfg.c) == DCCOOL_OK);
  CHECK(dccool_config_set(cfg.c, "/train/max_epoch", "7") == DCCOOL_OK);
  char* js = nullptr;
  REQUIRE(dccool_config_to_json(cfg.c, &js) == DCCOOL_OK);
  CHECK(take(js).find("\"max_epoch\": 7") != std::string::npos);

  CHECK(dccool_config_set(cfg.c, "/train/max_epoch", "not json") == DCCOOL_ERR_CONFIG);
  CHECK(std::string(dccool_last_error()).size() > 0);
  CHECK(dccool_config_set(cfg.c, "/train/nonexistent", "1") == DCCOOL_ERR_CONFIG);
  // Rejected sets leave the config unchanged.
  REQUIRE(dccool_config_to_json(cfg.c, &js) == DCCOOL_OK);
  const std::string after = take(js);
  CHECK(after.find("\"max_epoch\": 7") != std::string::npos);
  CHECK(after.find("\"batch_size\": 128") != std::string::npos);

  CHECK(dccool_config_default(nullptr) == DCCOOL_ERR_ARGUMENT);
  CHECK(dccool_config_set(nullptr, "/a", "1") == DCCOOL_ERR_ARGUMENT);
  dccool_config* missing = nullptr;
  CHECK(dccool_config_load("/nonexistent/dccool.json", &missing) != DCCOOL_OK);
  CHECK(missing == nullptr);
}

TEST_CASE("pipeline through the C API: trace, train, evaluate, load, act") {
  const fs::path dir = fs::temp_directory_path() / "dccool_capi";
  fs::remove_all(dir);
  Config cfg;
  REQUIRE(dccool_config_default(&cfg.c) == DCCOOL_OK);
  REQUIRE(dccool_config_set_output_dir(cfg.c, dir.c_str()) == DCCOOL_OK);
  REQUIRE(dccool_config_set(cfg.c, "/scenario/length", "500") == DCCOOL_OK);
  REQUIRE(dccool_config_set(cfg.c, "/train/max_epoch", "2") == DCCOOL_OK);
  REQUIRE(dccool_config_set(cfg.c, "/evaluate/horizon", "5") == DCCOOL_OK);

  CHECK(dccool_evaluate(cfg.c, "cca", nullptr) != DCCOOL_OK);  // nothing trained yet
  REQUIRE(dccool_generate_trace(cfg.c, nullptr) == DCCOOL_OK);
  int lines = 0;
  char* summary = nullptr;
  REQUIRE(dccool_train(cfg.c, count_lines, &lines, &summary) == DCCOOL_OK);
  CHECK(lines > 0);
  CHECK(take(summary).find("best_critic_epoch") != std::string::npos);
  REQUIRE(dccool_evaluate(cfg.c, "cca", &summary) == DCCOOL_OK);
  CHECK(take(summary).find("mean_energy") != std::string::npos);
  CHECK(dccool_evaluate(cfg.c, "pid", nullptr) == DCCOOL_ERR_CONFIG);
  {
    Config bad;
    REQUIRE(dccool_config_default(&bad.c) == DCCOOL_OK);
    REQUIRE(dccool_config_set_output_dir(bad.c, dir.c_str()) == DCCOOL_OK);
    REQUIRE(dccool_config_set(bad.c, "/train/batch_size", "0") == DCCOOL_OK);
    CHECK(dccool_train(bad.c, nullptr, nullptr, nullptr) == DCCOOL_ERR_CONFIG);
    CHECK(std::string(dccool_last_error()).find("batch_size") != std::string::npos);
  }

  dccool_network* net = nullptr;
  REQUIRE(dccool_network_load((dir / "critic.json").c_str(), &net) == DCCOOL_OK);
  CHECK(dccool_network_input_dim(net) == 7);
  CHECK(dccool_network_output_dim(net) == 3);
  std::vector<double> in(14, 0.1), out(6, 0.0);
  REQUIRE(dccool_network_forward(net, in.data(), 2, out.data()) == DCCOOL_OK);
  CHECK(out[0] == out[3]);
  CHECK(std::isfinite(out[1]));
  dccool_network_free(net);

  dccool_policy* pol = nullptr;
  REQUIRE(dccool_policy_load((dir / "actor.json").c_str(), &pol) == DCCOOL_OK);
  size_t ns = 0, na = 0, tau = 0;
  REQUIRE(dccool_policy_dims(pol, &ns, &na, &tau) == DCCOOL_OK);
  CHECK(ns == 2);
  CHECK(na == 5);
  CHECK(tau == 1);
  const double state[2] = {30.0, 0.7};
  double action[5] = {};
  REQUIRE(dccool_policy_act(pol, nullptr, 0, state, 2, action, 5) == DCCOOL_OK);
  CHECK(action[0] >= 16.0);
  CHECK(action[0] <= 28.0);
  CHECK(action[2] >= 7.0);
  CHECK(action[2] <= 15.0);
  CHECK(dccool_policy_act(pol, nullptr, 0, state, 1, action, 5) != DCCOOL_OK);
  const double hist[7] = {};
  CHECK(dccool_policy_act(pol, hist, 7, state, 2, action, 5) != DCCOOL_OK);
  dccool_policy_free(pol);

  CHECK(dccool_policy_load((dir / "critic.json").c_str(), &pol) == DCCOOL_ERR_DATA);
  CHECK(dccool_network_load((dir / "missing.json").c_str(), &net) == DCCOOL_ERR_IO);
  fs::remove_all(dir);
}
