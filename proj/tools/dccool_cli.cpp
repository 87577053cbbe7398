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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dccool/dccool.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

int exit_code(dccool_status s) {
  switch (s) {
    case DCCOOL_OK: return 0;
    case DCCOOL_ERR_CONFIG:
    case DCCOOL_ERR_ARGUMENT: return kExitConfig;
    default: return kExitRuntime;
  }
}

int report(dccool_status s, const char* what) {
  if (s != DCCOOL_OK) std::fprintf(stderr, "dccool %s: %s\n", what, dccool_last_error());
  return exit_code(s);
}

void print_progress(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

struct Owned {
  char* s = nullptr;
  ~Owned() { dccool_string_free(s); }
};

struct ConfigHandle {
  dccool_config* c = nullptr;
  ~ConfigHandle() { dccool_config_free(c); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline actor-critic cooling control: traces, training and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(dccool_version()));

  std::string config_path, output_dir;
  std::vector<std::string> overrides;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "Experiment config (JSON)");
  app.add_option("-o,--output-dir", output_dir,
                 "Output directory (overrides DCCOOL_OUTPUT_DIR and the config)");
  app.add_option("--set", overrides, "Override a config field: /json/pointer=value")
      ->take_all();
  app.add_flag("-q,--quiet", quiet, "Print only the JSON summary");

  auto* gen = app.add_subcommand("generate-trace", "Simulate the random behavior policy");
  std::size_t length = 0;
  std::uint64_t trace_seed = 0;
  gen->add_option("--length", length, "Trace length in steps");
  gen->add_option("--seed", trace_seed, "Behavior policy seed");

  auto* tr = app.add_subcommand("train", "Train critic and actor on the trace");
  bool due = false;
  std::size_t tau = 0, epochs = 0;
  std::uint64_t train_seed = 0;
  tr->add_flag("--due", due, "Select the critic by underestimation error");
  tr->add_option("--tau", tau, "History window length")->check(CLI::PositiveNumber);
  tr->add_option("--epochs", epochs, "Maximum epochs")->check(CLI::PositiveNumber);
  tr->add_option("--seed", train_seed, "Training seed");

  auto* ev = app.add_subcommand("evaluate", "Closed-loop evaluation on the test period");
  std::string controller;
  ev->add_option("controller", controller, "Controller")
      ->required()
      ->check(CLI::IsMember({"cca", "ts", "fixed"}));

  auto* cmp = app.add_subcommand("compare", "All controllers over several seeds");
  std::size_t runs = 10;
  cmp->add_option("--runs", runs, "Number of seeds")->check(CLI::PositiveNumber);

  auto* sw = app.add_subcommand("sweep", "Train and evaluate over parameter values");
  std::string param;
  std::vector<double> values;
  sw->add_option("parameter", param, "Parameter")
      ->required()
      ->check(CLI::IsMember({"lambda", "tau"}));
  sw->add_option("--values", values, "Values (comma separated)")->delimiter(',');

  auto* show = app.add_subcommand("show-config", "Print the effective config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  ConfigHandle cfg;
  dccool_status s = config_path.empty() ? dccool_config_default(&cfg.c)
                                        : dccool_config_load(config_path.c_str(), &cfg.c);
  if (s != DCCOOL_OK) return report(s, "config");
  if (!output_dir.empty()) {
    s = dccool_config_set_output_dir(cfg.c, output_dir.c_str());
    if (s != DCCOOL_OK) return report(s, "config");
  }
  auto set = [&](const std::string& ptr, const std::string& value) {
    return dccool_config_set(cfg.c, ptr.c_str(), value.c_str());
  };
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "dccool: --set expects pointer=value, got '%s'\n", o.c_str());
      return kExitConfig;
    }
    s = set(o.substr(0, eq), o.substr(eq + 1));
    if (s != DCCOOL_OK) return report(s, "config");
  }

  dccool_progress_fn progress = quiet ? nullptr : print_progress;
  Owned summary;
  const char* what = "";
  if (*gen) {
    what = "generate-trace";
    if (length) s = set("/scenario/length", std::to_string(length));
    if (s == DCCOOL_OK && gen->count("--seed")) s = set("/trace_gen/seed", std::to_string(trace_seed));
    if (s == DCCOOL_OK) s = dccool_generate_trace(cfg.c, &summary.s);
  } else if (*tr) {
    what = "train";
    if (due) s = set("/train/due", "true");
    if (s == DCCOOL_OK && tau) s = set("/train/tau", std::to_string(tau));
    if (s == DCCOOL_OK && epochs) s = set("/train/max_epoch", std::to_string(epochs));
    if (s == DCCOOL_OK && tr->count("--seed")) s = set("/train/seed", std::to_string(train_seed));
    if (s == DCCOOL_OK) s = dccool_train(cfg.c, progress, nullptr, &summary.s);
  } else if (*ev) {
    what = "evaluate";
    s = dccool_evaluate(cfg.c, controller.c_str(), &summary.s);
  } else if (*cmp) {
    what = "compare";
    s = dccool_compare(cfg.c, runs, progress, nullptr, &summary.s);
  } else if (*sw) {
    what = "sweep";
    if (values.empty()) {
      values = param == "lambda" ? std::vector<double>{0.0, 0.005, 0.01, 0.02, 0.04}
                                 : std::vector<double>{1, 2, 4};
    }
    s = dccool_sweep(cfg.c, param.c_str(), values.data(), values.size(), progress, nullptr,
                     &summary.s);
  } else if (*show) {
    what = "show-config";
    s = dccool_config_to_json(cfg.c, &summary.s);
  }
  if (s != DCCOOL_OK) return report(s, what);
  if (summary.s) std::cout << summary.s << '\n';
  return 0;
}
