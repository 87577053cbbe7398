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

#include "dccool/dccool.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "dccool/error.hpp"
#include "dccool/experiment.hpp"
#include "dccool/serialize.hpp"

struct dccool_config {
  dccool::Json json;
  dccool::ExperimentConfig cfg;
};

struct dccool_network {
  dccool::nn::Network net;
};

struct dccool_policy {
  dccool::PolicyCheckpoint p;
};

namespace {

thread_local std::string g_last_error;

dccool_status fail(dccool_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename F>
dccool_status guard(F&& f) {
  g_last_error.clear();
  try {
    f();
    return DCCOOL_OK;
  } catch (const dccool::ConfigError& e) {
    return fail(DCCOOL_ERR_CONFIG, e.what());
  } catch (const dccool::IoError& e) {
    return fail(DCCOOL_ERR_IO, e.what());
  } catch (const dccool::DataError& e) {
    return fail(DCCOOL_ERR_DATA, e.what());
  } catch (const dccool::DimensionError& e) {
    return fail(DCCOOL_ERR_ARGUMENT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(DCCOOL_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DCCOOL_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(DCCOOL_ERR_RUNTIME, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void emit(char** out, const dccool::Json& j) {
  if (out) *out = dup_string(j.dump(2));
}

dccool::ProgressFn wrap(dccool_progress_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](const std::string& line) { fn(line.c_str(), user); };
}

// DCCOOL_OUTPUT_DIR wins over the config file.
void apply_env(dccool_config& c) {
  if (const char* dir = std::getenv("DCCOOL_OUTPUT_DIR"); dir && *dir) {
    c.json["paths"]["output_dir"] = dir;
    c.cfg.output_dir = dir;
  }
}

#define DCCOOL_REQUIRE(cond, what) \
  if (!(cond)) return fail(DCCOOL_ERR_ARGUMENT, what)

}  // namespace

extern "C" {

const char* dccool_version(void) { return DCCOOL_VERSION; }

const char* dccool_last_error(void) { return g_last_error.c_str(); }

void dccool_string_free(char* s) { std::free(s); }

dccool_status dccool_config_default(dccool_config** out) {
  DCCOOL_REQUIRE(out, "out is null");
  return guard([&] {
    auto c = std::make_unique<dccool_config>();
    c->cfg = dccool::default_experiment_config();
    c->json = dccool::to_json(c->cfg);
    apply_env(*c);
    *out = c.release();
  });
}

dccool_status dccool_config_load(const char* path, dccool_config** out) {
  DCCOOL_REQUIRE(path && out, "path or out is null");
  return guard([&] {
    auto c = std::make_unique<dccool_config>();
    if (!std::filesystem::exists(path))
      throw dccool::ConfigError(std::string("config file ") + path + " does not exist");
    try {
      c->json = dccool::read_json_file(path);
    } catch (const dccool::DataError& e) {
      throw dccool::ConfigError(e.what());
    }
    c->cfg = dccool::experiment_config_from_json(c->json);
    apply_env(*c);
    *out = c.release();
  });
}

dccool_status dccool_config_set(dccool_config* cfg, const char* pointer, const char* json_value) {
  DCCOOL_REQUIRE(cfg && pointer && json_value, "null argument");
  return guard([&] {
    dccool::Json value;
    try {
      value = dccool::Json::parse(json_value);
    } catch (const nlohmann::json::parse_error&) {
      // Bare words are taken as strings.
      value = std::string(json_value);
    }
    dccool::Json j = cfg->json;
    try {
      j[nlohmann::ordered_json::json_pointer(pointer)] = value;
    } catch (const nlohmann::json::exception& e) {
      throw dccool::ConfigError(std::string("cannot set ") + pointer + ": " + e.what());
    }
    dccool::ExperimentConfig parsed = dccool::experiment_config_from_json(j);
    cfg->json = std::move(j);
    cfg->cfg = std::move(parsed);
  });
}

dccool_status dccool_config_set_output_dir(dccool_config* cfg, const char* dir) {
  DCCOOL_REQUIRE(cfg && dir && *dir, "null or empty argument");
  return guard([&] {
    cfg->json["paths"]["output_dir"] = dir;
    cfg->cfg.output_dir = dir;
  });
}

dccool_status dccool_config_to_json(const dccool_config* cfg, char** out) {
  DCCOOL_REQUIRE(cfg && out, "null argument");
  return guard([&] { *out = dup_string(dccool::to_json(cfg->cfg).dump(2)); });
}

dccool_status dccool_config_save(const dccool_config* cfg, const char* path) {
  DCCOOL_REQUIRE(cfg && path, "null argument");
  return guard([&] { dccool::write_json_file(path, dccool::to_json(cfg->cfg)); });
}

void dccool_config_free(dccool_config* cfg) { delete cfg; }

dccool_status dccool_generate_trace(const dccool_config* cfg, char** summary_json) {
  DCCOOL_REQUIRE(cfg, "config is null");
  return guard([&] { emit(summary_json, dccool::cmd_generate_trace(cfg->cfg)); });
}

dccool_status dccool_train(const dccool_config* cfg, dccool_progress_fn progress, void* user,
                           char** summary_json) {
  DCCOOL_REQUIRE(cfg, "config is null");
  return guard([&] { emit(summary_json, dccool::cmd_train(cfg->cfg, wrap(progress, user))); });
}

dccool_status dccool_evaluate(const dccool_config* cfg, const char* controller,
                              char** summary_json) {
  DCCOOL_REQUIRE(cfg && controller, "null argument");
  return guard([&] {
    const auto kind = dccool::controller_from_string(controller);
    emit(summary_json, dccool::cmd_evaluate(cfg->cfg, kind));
  });
}

dccool_status dccool_compare(const dccool_config* cfg, size_t runs, dccool_progress_fn progress,
                             void* user, char** summary_json) {
  DCCOOL_REQUIRE(cfg, "config is null");
  return guard(
      [&] { emit(summary_json, dccool::cmd_compare(cfg->cfg, runs, wrap(progress, user))); });
}

dccool_status dccool_sweep(const dccool_config* cfg, const char* parameter, const double* values,
                           size_t count, dccool_progress_fn progress, void* user,
                           char** summary_json) {
  DCCOOL_REQUIRE(cfg && parameter && (values || count == 0), "null argument");
  return guard([&] {
    const auto param = dccool::sweep_param_from_string(parameter);
    std::vector<double> v(values, values + count);
    emit(summary_json, dccool::cmd_sweep(cfg->cfg, param, v, wrap(progress, user)));
  });
}

dccool_status dccool_network_load(const char* path, dccool_network** out) {
  DCCOOL_REQUIRE(path && out, "null argument");
  return guard([&] {
    const dccool::Json j = dccool::read_json_file(path);
    auto n = std::make_unique<dccool_network>();
    n->net = dccool::network_from_json(j.contains("network") ? j.at("network") : j);
    *out = n.release();
  });
}

size_t dccool_network_input_dim(const dccool_network* net) {
  return net ? static_cast<size_t>(net->net.input_dim()) : 0;
}

size_t dccool_network_output_dim(const dccool_network* net) {
  return net ? static_cast<size_t>(net->net.output_dim()) : 0;
}

dccool_status dccool_network_forward(const dccool_network* net, const double* input, size_t batch,
                                     double* output) {
  DCCOOL_REQUIRE(net && input && output, "null argument");
  DCCOOL_REQUIRE(batch > 0, "batch must be positive");
  return guard([&] {
    const auto in = net->net.input_dim(), outd = net->net.output_dim();
    const auto b = static_cast<Eigen::Index>(batch);
    Eigen::MatrixXd x = Eigen::Map<const Eigen::MatrixXd>(input, in, b);
    Eigen::Map<Eigen::MatrixXd>(output, outd, b) = dccool::nn::forward(net->net, x);
  });
}

void dccool_network_free(dccool_network* net) { delete net; }

dccool_status dccool_policy_load(const char* path, dccool_policy** out) {
  DCCOOL_REQUIRE(path && out, "null argument");
  return guard([&] {
    auto p = std::make_unique<dccool_policy>();
    p->p = dccool::policy_from_json(dccool::read_json_file(path));
    *out = p.release();
  });
}

dccool_status dccool_policy_dims(const dccool_policy* p, size_t* state_dim, size_t* action_dim,
                                 size_t* tau) {
  DCCOOL_REQUIRE(p, "policy is null");
  if (state_dim) *state_dim = p->p.norm.state.size();
  if (action_dim) *action_dim = p->p.norm.action.size();
  if (tau) *tau = p->p.tau;
  return DCCOOL_OK;
}

dccool_status dccool_policy_act(const dccool_policy* p, const double* history, size_t history_len,
                                const double* state, size_t state_len, double* action,
                                size_t action_len) {
  DCCOOL_REQUIRE(p && state && action, "null argument");
  DCCOOL_REQUIRE(history || history_len == 0, "history is null");
  const std::size_t ns = p->p.norm.state.size(), na = p->p.norm.action.size();
  DCCOOL_REQUIRE(state_len == ns, "state has the wrong length");
  DCCOOL_REQUIRE(action_len == na, "action buffer has the wrong length");
  DCCOOL_REQUIRE(history_len == (p->p.tau - 1) * (ns + na),
                 "history must hold tau-1 slots of state and action");
  return guard([&] {
    std::vector<dccool::TraceRecord> hist(p->p.tau - 1);
    for (std::size_t k = 0; k < hist.size(); ++k) {
      const double* row = history + k * (ns + na);
      hist[k].state.assign(row, row + ns);
      hist[k].action.assign(row + ns, row + ns + na);
    }
    const auto a = dccool::act(p->p.actor, hist, std::span<const double>(state, ns), p->p.norm,
                               p->p.bounds, p->p.tau);
    std::copy(a.begin(), a.end(), action);
  });
}

void dccool_policy_free(dccool_policy* p) { delete p; }

}  // extern "C"
