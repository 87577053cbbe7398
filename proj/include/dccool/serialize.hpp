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

// JSON encodings of networks, checkpoints and reports. Doubles are written
// in shortest round-trip form, so save/load reproduces weights exactly.

#include <filesystem>

#include <json.hpp>

#include "dccool/baselines.hpp"
#include "dccool/cca.hpp"
#include "dccool/nn.hpp"
#include "dccool/objective.hpp"
#include "dccool/trace.hpp"

namespace dccool {

using Json = nlohmann::ordered_json;

inline constexpr int kNetworkFormatVersion = 1;

Json to_json(const nn::Network& net);
nn::Network network_from_json(const Json& j);

Json to_json(const NormalizationSpec& spec);
NormalizationSpec normalization_from_json(const Json& j);

Json to_json(const CostParams& p);
CostParams cost_params_from_json(const Json& j);

Json to_json(const ActionBounds& b);
ActionBounds bounds_from_json(const Json& j);

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);

Json to_json(const DEConfig& c);
DEConfig de_config_from_json(const Json& j);

Json to_json(const FixedController& c);
FixedController fixed_controller_from_json(const Json& j);

Json to_json(const TrainReport& r);

// Self-contained checkpoints: network, normalization and everything needed
// to evaluate or act without the training config.
Json critic_to_json(const Critic& c);
Critic critic_from_json(const Json& j);

struct PolicyCheckpoint {
  Actor actor;
  NormalizationSpec norm;
  ActionBounds bounds;
  std::size_t tau = 1;
  std::vector<std::string> state_names;
};
Json policy_to_json(const PolicyCheckpoint& p);
PolicyCheckpoint policy_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
// Writes with a trailing newline; throws IoError.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace dccool
