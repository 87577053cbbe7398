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

#include "dccool/serialize.hpp"

#include <fstream>
#include <sstream>

#include "dccool/error.hpp"

namespace dccool {

namespace {

// Reads an optional field into `out`, converting type errors to ConfigError.
template <typename T>
void get_opt(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

template <typename T>
T get_req(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw DataError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(where + "." + key + " has the wrong type");
  }
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void reject_unknown(const Json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

Json ranges_to_json(const std::vector<ChannelRange>& r) {
  Json a = Json::array();
  for (const auto& c : r) a.push_back(Json::array({c.min, c.max}));
  return a;
}

std::vector<ChannelRange> ranges_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw DataError(where + " must be an array");
  std::vector<ChannelRange> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw DataError(where + ": expected [min, max] pairs");
    out.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return out;
}

Json activations_to_json(const std::vector<nn::Activation>& acts) {
  Json a = Json::array();
  for (auto x : acts) a.push_back(std::string(nn::to_string(x)));
  return a;
}

std::vector<nn::Activation> activations_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of names");
  std::vector<nn::Activation> out;
  for (const auto& e : j) out.push_back(nn::activation_from_string(e.get<std::string>()));
  return out;
}

}  // namespace

Json to_json(const nn::Network& net) {
  Json j;
  j["version"] = kNetworkFormatVersion;
  Json sizes = Json::array();
  if (!net.empty()) sizes.push_back(net.input_dim());
  for (const auto& l : net.layers()) sizes.push_back(l.out_size());
  j["layer_sizes"] = sizes;
  Json acts = Json::array();
  for (const auto& l : net.layers()) acts.push_back(std::string(nn::to_string(l.activation)));
  j["activations"] = acts;
  Json layers = Json::array();
  for (const auto& l : net.layers()) {
    Json w = Json::array();
    for (nn::Index r = 0; r < l.weights.rows(); ++r)
      for (nn::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    Json b = Json::array();
    for (nn::Index r = 0; r < l.bias.size(); ++r) b.push_back(l.bias(r));
    layers.push_back(Json{{"weights", w}, {"bias", b}});
  }
  j["layers"] = layers;
  return j;
}

nn::Network network_from_json(const Json& j) {
  const std::string where = "network";
  const int version = get_req<int>(j, "version", where);
  if (version != kNetworkFormatVersion)
    throw DataError("network: unsupported format version " + std::to_string(version));
  const auto sizes = get_req<std::vector<nn::Index>>(j, "layer_sizes", where);
  const auto acts = get_req<std::vector<std::string>>(j, "activations", where);
  const Json& layers = j.at("layers");
  if (sizes.size() < 2 || acts.size() != sizes.size() - 1 || layers.size() != acts.size())
    throw DataError("network: layer_sizes, activations and layers disagree");
  std::vector<nn::Layer> out;
  for (std::size_t k = 0; k < acts.size(); ++k) {
    nn::Layer l;
    l.activation = nn::activation_from_string(acts[k]);
    const auto w = get_req<std::vector<double>>(layers[k], "weights", where);
    const auto b = get_req<std::vector<double>>(layers[k], "bias", where);
    const nn::Index rows = sizes[k + 1], cols = sizes[k];
    if (static_cast<nn::Index>(w.size()) != rows * cols || static_cast<nn::Index>(b.size()) != rows)
      throw DataError("network: layer " + std::to_string(k) + " has the wrong number of values");
    l.weights.resize(rows, cols);
    for (nn::Index r = 0; r < rows; ++r)
      for (nn::Index c = 0; c < cols; ++c) l.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
    l.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
    out.push_back(std::move(l));
  }
  return nn::Network(std::move(out));
}

Json to_json(const NormalizationSpec& spec) {
  return Json{{"margin", spec.margin},
              {"state", ranges_to_json(spec.state)},
              {"action", ranges_to_json(spec.action)},
              {"readings", ranges_to_json(spec.readings)}};
}

NormalizationSpec normalization_from_json(const Json& j) {
  NormalizationSpec s;
  s.margin = get_req<double>(j, "margin", "normalization");
  s.state = ranges_from_json(j.at("state"), "normalization.state");
  s.action = ranges_from_json(j.at("action"), "normalization.action");
  s.readings = ranges_from_json(j.at("readings"), "normalization.readings");
  return s;
}

Json to_json(const CostParams& p) {
  Json j{{"lambda", p.lambda},
         {"phi", p.phi},
         {"energy_channel", p.energy_channel},
         {"temp_channels", p.temp_channels}};
  if (p.fan_law)
    j["fan_law"] = Json{{"action_channel", p.fan_law->action_channel},
                        {"rated_flow", p.fan_law->rated_flow},
                        {"rated_power", p.fan_law->rated_power}};
  return j;
}

CostParams cost_params_from_json(const Json& j) {
  const std::string where = "cost";
  require_object(j, where);
  reject_unknown(j, {"lambda", "phi", "energy_channel", "temp_channels", "fan_law"}, where);
  CostParams p;
  get_opt(j, "lambda", p.lambda, where);
  get_opt(j, "phi", p.phi, where);
  get_opt(j, "energy_channel", p.energy_channel, where);
  get_opt(j, "temp_channels", p.temp_channels, where);
  if (j.contains("fan_law") && !j.at("fan_law").is_null()) {
    const Json& f = j.at("fan_law");
    require_object(f, "cost.fan_law");
    reject_unknown(f, {"action_channel", "rated_flow", "rated_power"}, "cost.fan_law");
    FanLaw law;
    get_opt(f, "action_channel", law.action_channel, "cost.fan_law");
    get_opt(f, "rated_flow", law.rated_flow, "cost.fan_law");
    get_opt(f, "rated_power", law.rated_power, "cost.fan_law");
    p.fan_law = law;
  }
  return p;
}

Json to_json(const ActionBounds& b) {
  Json a = Json::array();
  for (const auto& c : b.channels)
    a.push_back(Json{{"name", c.name}, {"lower", c.lower}, {"upper", c.upper}});
  return a;
}

ActionBounds bounds_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("bounds must be an array");
  ActionBounds b;
  for (const auto& e : j) {
    require_object(e, "bounds entry");
    reject_unknown(e, {"name", "lower", "upper"}, "bounds entry");
    ActionBound c;
    get_opt(e, "name", c.name, "bounds");
    if (!e.contains("lower") || !e.contains("upper"))
      throw ConfigError("bounds entry '" + c.name + "' needs lower and upper");
    get_opt(e, "lower", c.lower, "bounds." + c.name);
    get_opt(e, "upper", c.upper, "bounds." + c.name);
    b.channels.push_back(c);
  }
  return b;
}

Json to_json(const TrainConfig& c) {
  return Json{{"max_epoch", c.max_epoch},
              {"batch_size", c.batch_size},
              {"tau", c.tau},
              {"due", c.due},
              {"mu_val_reset_period", c.mu_val_reset_period},
              {"seed", c.seed},
              {"rho", c.rho},
              {"eps", c.eps},
              {"init_stddev", c.init_stddev},
              {"critic_hidden", c.critic_hidden},
              {"critic_activations", activations_to_json(c.critic_activations)},
              {"actor_hidden", c.actor_hidden},
              {"actor_activations", activations_to_json(c.actor_activations)},
              {"actor_after_critic", c.actor_after_critic},
              {"underestimation_margin", c.underestimation_margin}};
}

TrainConfig train_config_from_json(const Json& j) {
  const std::string where = "train";
  require_object(j, where);
  reject_unknown(j,
                 {"max_epoch", "batch_size", "tau", "due", "mu_val_reset_period", "seed", "rho",
                  "eps", "init_stddev", "critic_hidden", "critic_activations", "actor_hidden",
                  "actor_activations", "actor_after_critic", "underestimation_margin"},
                 where);
  TrainConfig c;
  get_opt(j, "max_epoch", c.max_epoch, where);
  get_opt(j, "batch_size", c.batch_size, where);
  get_opt(j, "tau", c.tau, where);
  get_opt(j, "due", c.due, where);
  get_opt(j, "mu_val_reset_period", c.mu_val_reset_period, where);
  get_opt(j, "seed", c.seed, where);
  get_opt(j, "rho", c.rho, where);
  get_opt(j, "eps", c.eps, where);
  get_opt(j, "init_stddev", c.init_stddev, where);
  get_opt(j, "critic_hidden", c.critic_hidden, where);
  get_opt(j, "actor_hidden", c.actor_hidden, where);
  if (j.contains("critic_activations"))
    c.critic_activations = activations_from_json(j.at("critic_activations"), where);
  if (j.contains("actor_activations"))
    c.actor_activations = activations_from_json(j.at("actor_activations"), where);
  get_opt(j, "actor_after_critic", c.actor_after_critic, where);
  get_opt(j, "underestimation_margin", c.underestimation_margin, where);
  return c;
}

Json to_json(const DEConfig& c) {
  return Json{{"population", c.population},
              {"generations", c.generations},
              {"crossover_prob", c.crossover_prob},
              {"differential_weight", c.differential_weight},
              {"seed", c.seed}};
}

DEConfig de_config_from_json(const Json& j) {
  const std::string where = "de";
  require_object(j, where);
  reject_unknown(j, {"population", "generations", "crossover_prob", "differential_weight", "seed"},
                 where);
  DEConfig c;
  get_opt(j, "population", c.population, where);
  get_opt(j, "generations", c.generations, where);
  get_opt(j, "crossover_prob", c.crossover_prob, where);
  get_opt(j, "differential_weight", c.differential_weight, where);
  get_opt(j, "seed", c.seed, where);
  return c;
}

Json to_json(const FixedController& c) {
  Json rules = Json::array();
  for (const auto& r : c.rules)
    rules.push_back(Json{{"bias", r.bias},
                         {"state_coeffs", r.state_coeffs},
                         {"target_coeff", r.target_coeff}});
  return Json{{"target_zone_temp", c.target_zone_temp}, {"rules", rules}};
}

FixedController fixed_controller_from_json(const Json& j) {
  const std::string where = "fixed_controller";
  require_object(j, where);
  reject_unknown(j, {"target_zone_temp", "rules"}, where);
  FixedController c;
  get_opt(j, "target_zone_temp", c.target_zone_temp, where);
  if (j.contains("rules")) {
    if (!j.at("rules").is_array()) throw ConfigError("fixed_controller.rules must be an array");
    for (const auto& e : j.at("rules")) {
      require_object(e, "fixed_controller rule");
      reject_unknown(e, {"bias", "state_coeffs", "target_coeff"}, "fixed_controller rule");
      SetpointRule r;
      get_opt(e, "bias", r.bias, where);
      get_opt(e, "state_coeffs", r.state_coeffs, where);
      get_opt(e, "target_coeff", r.target_coeff, where);
      c.rules.push_back(r);
    }
  }
  return c;
}

Json to_json(const TrainReport& r) {
  auto checkpoint = [](const CheckpointSummary& c) {
    return Json{{"epoch", c.epoch},
                {"error", c.error},
                {"mae", c.mae},
                {"underestimation_fraction", c.underestimation_fraction}};
  };
  Json epochs = Json::array();
  for (const auto& e : r.epochs)
    epochs.push_back(Json{{"epoch", e.epoch},
                          {"critic_train_loss", e.critic_train_loss},
                          {"critic_val_mse", e.critic_val_mse},
                          {"critic_val_due", e.critic_val_due},
                          {"actor_val", e.actor_val},
                          {"critic_improved", e.critic_improved},
                          {"actor_improved", e.actor_improved},
                          {"actor_reset", e.actor_reset}});
  return Json{{"validation", r.due ? "due" : "mse"},
              {"best_critic_epoch", r.best_critic_epoch},
              {"best_critic_error", r.best_critic_error},
              {"best_actor_epoch", r.best_actor_epoch},
              {"best_actor_error", r.best_actor_error},
              {"best_critic_mae", r.best_critic_mae},
              {"cost_scale", r.cost_scale},
              {"mse_checkpoint", checkpoint(r.mse_checkpoint)},
              {"due_checkpoint", checkpoint(r.due_checkpoint)},
              {"epochs", epochs}};
}

Json critic_to_json(const Critic& c) {
  return Json{{"kind", "critic"},
              {"tau", c.tau()},
              {"cost", to_json(c.cost_params())},
              {"normalization", to_json(c.normalization())},
              {"network", to_json(c.body())}};
}

Critic critic_from_json(const Json& j) {
  if (get_req<std::string>(j, "kind", "checkpoint") != "critic")
    throw DataError("checkpoint is not a critic");
  return Critic(network_from_json(j.at("network")), cost_params_from_json(j.at("cost")),
                normalization_from_json(j.at("normalization")),
                get_req<std::size_t>(j, "tau", "critic"));
}

Json policy_to_json(const PolicyCheckpoint& p) {
  return Json{{"kind", "actor"},
              {"tau", p.tau},
              {"state_names", p.state_names},
              {"bounds", to_json(p.bounds)},
              {"normalization", to_json(p.norm)},
              {"network", to_json(p.actor.net)}};
}

PolicyCheckpoint policy_from_json(const Json& j) {
  if (get_req<std::string>(j, "kind", "checkpoint") != "actor")
    throw DataError("checkpoint is not an actor");
  PolicyCheckpoint p;
  p.tau = get_req<std::size_t>(j, "tau", "actor");
  if (j.contains("state_names")) p.state_names = j.at("state_names").get<std::vector<std::string>>();
  p.bounds = bounds_from_json(j.at("bounds"));
  p.norm = normalization_from_json(j.at("normalization"));
  p.actor.net = network_from_json(j.at("network"));
  const auto ns = p.norm.state.size(), na = p.norm.action.size();
  if (p.tau == 0 || p.actor.net.input_dim() != static_cast<nn::Index>(p.tau * (ns + na) - na) ||
      p.actor.net.output_dim() != static_cast<nn::Index>(na) || p.bounds.size() != na)
    throw DataError("actor checkpoint dimensions are inconsistent");
  return p;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("error while writing " + path.string());
}

}  // namespace dccool
