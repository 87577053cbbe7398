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

// Offline actor-critic training on a fixed trace.
//
// The critic body maps a window X_Q = [s_{t-tau+1}, a_{t-tau+1}, ..., s_t, a_t]
// (normalized) to the normalized readings of slot t+1. A fixed cost head
// denormalizes those readings and applies the training cost, so the critic's
// scalar output is the predicted cost of taking a_t. The actor maps X_mu (the
// same window without a_t) to a_t and is trained by descending the critic's
// cost with the critic held fixed.

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dccool/nn.hpp"
#include "dccool/objective.hpp"
#include "dccool/trace.hpp"

namespace dccool {

class Critic {
 public:
  Critic() = default;
  // Throws ConfigError/DimensionError if the body does not fit the window
  // layout or the readings dimension.
  Critic(nn::Network body, CostParams cost, NormalizationSpec norm, std::size_t tau);

  const nn::Network& body() const { return body_; }
  nn::Network& body() { return body_; }
  const CostParams& cost_params() const { return cost_; }
  const NormalizationSpec& normalization() const { return norm_; }
  std::size_t tau() const { return tau_; }
  std::size_t state_dim() const { return norm_.state.size(); }
  std::size_t action_dim() const { return norm_.action.size(); }
  std::size_t reading_dim() const { return norm_.readings.size(); }

  // Normalized readings, one column per sample.
  Eigen::MatrixXd predict_readings(const Eigen::MatrixXd& xq) const;
  // Cost of each column of xq.
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& xq) const;
  // Cost for physical readings taken from the normalized targets yr and the
  // normalized inputs xq (the latter only matter under the fan law).
  Eigen::VectorXd true_cost(const Eigen::MatrixXd& xq, const Eigen::MatrixXd& yr) const;

  struct CostGrad {
    Eigen::VectorXd cost;
    Eigen::MatrixXd input;  // d(sum_j w_j cost_j) / d xq
  };
  // Input gradient of the weighted cost sum. weights has one entry per column.
  CostGrad evaluate_with_input_grad(const Eigen::MatrixXd& xq,
                                    const Eigen::VectorXd& weights) const;
  // Parameter gradients of the weighted cost sum (used by gradient checks).
  nn::Gradients cost_param_grad(const Eigen::MatrixXd& xq, const Eigen::VectorXd& weights) const;

 private:
  Eigen::MatrixXd head_grad(const Eigen::MatrixXd& body_out, const Eigen::VectorXd& weights) const;
  double energy_from_action(const Eigen::MatrixXd& xq, Eigen::Index col) const;

  nn::Network body_;
  CostParams cost_;
  NormalizationSpec norm_;
  std::size_t tau_ = 1;
};

struct Actor {
  nn::Network net;  // |X_mu| -> |a|, tanh output
};

struct TrainConfig {
  std::size_t max_epoch = 200;
  std::size_t batch_size = 128;
  std::size_t tau = 1;
  CostParams cost;
  bool due = false;
  std::size_t mu_val_reset_period = 20;  // 0 disables
  std::uint64_t seed = 1;
  double rho = 0.95;
  double eps = 1e-6;
  double init_stddev = 0.01;
  std::vector<nn::Index> critic_hidden{50, 50};
  std::vector<nn::Activation> critic_activations{nn::Activation::tanh, nn::Activation::tanh,
                                                 nn::Activation::linear};
  std::vector<nn::Index> actor_hidden{50, 50};
  std::vector<nn::Activation> actor_activations{nn::Activation::linear, nn::Activation::tanh,
                                                nn::Activation::tanh};
  // Whether the actor step of a batch sees the critic after that batch's
  // critic step (true) or before it.
  bool actor_after_critic = true;
  // In normalized cost units (see underestimation_fraction).
  double underestimation_margin = 0.02;

  // Throws ConfigError.
  void validate(std::size_t train_rows) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double critic_train_loss = 0.0;
  double critic_val_mse = 0.0;
  double critic_val_due = 0.0;
  double actor_val = 0.0;
  bool critic_improved = false;
  bool actor_improved = false;
  bool actor_reset = false;
};

struct CheckpointSummary {
  std::size_t epoch = 0;
  double error = std::numeric_limits<double>::infinity();
  std::vector<double> mae;             // per reading channel, normalized units
  double underestimation_fraction = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  bool due = false;
  std::size_t best_critic_epoch = 0;
  double best_critic_error = std::numeric_limits<double>::infinity();
  std::size_t best_actor_epoch = 0;
  double best_actor_error = std::numeric_limits<double>::infinity();
  // The checkpoints each validation rule would have picked on this run.
  CheckpointSummary mse_checkpoint;
  CheckpointSummary due_checkpoint;
  std::vector<double> best_critic_mae;
  double cost_scale = 1.0;  // cost units per normalized unit
};

struct TrainResult {
  Critic critic;
  Actor actor;
  TrainReport report;
  Critic critic_mse;  // best under squared error
  Critic critic_due;  // best under underestimation error
};

Critic make_critic(const TrainConfig& cfg, const NormalizationSpec& norm, std::uint64_t seed);
Actor make_actor(const TrainConfig& cfg, const NormalizationSpec& norm, std::uint64_t seed);

// One Adadelta step on sum_j ||y_r(j) - body(X_Q(j))||^2 / M. Returns the
// loss before the step.
double critic_batch_update(Critic& critic, const Eigen::MatrixXd& xq, const Eigen::MatrixXd& yr,
                           nn::AdadeltaState& opt);

// One Adadelta step on sum_j cost([X_mu(j), actor(X_mu(j))]) / M. The critic
// is not modified. Returns the mean cost before the step.
//
// Outputs already past +-kActorEdge (the edge of the normalized data range)
// get no gradient pushing them further out, so a tanh unit parked at a bound
// can still move back when the critic changes its mind.
inline constexpr double kActorEdge = 0.95;
double actor_batch_update(Actor& actor, const Critic& critic, const Eigen::MatrixXd& xmu,
                          nn::AdadeltaState& opt);

// Mean squared cost error, or with due=true the mean of max(y - y_pred, 0).
double validate_critic(const Critic& critic, const WindowedDataset& val, bool due);
// Mean critic cost of the actor's actions on the validation windows.
double validate_actor(const Actor& actor, const Critic& critic, const Eigen::MatrixXd& xmu);
// Mean |prediction - target| per reading channel, normalized units.
std::vector<double> reading_mae(const Critic& critic, const WindowedDataset& val);
// Share of rows whose predicted cost undershoots the true cost by more than
// margin normalized units (cost_scale cost units per normalized unit).
double underestimation_fraction(const Critic& critic, const WindowedDataset& val,
                                double margin, double cost_scale);

// Cost units per normalized unit, from the spread of the true cost over the
// given windows (same affine convention as NormalizationSpec).
double cost_scale(const Critic& critic, const WindowedDataset& data);

struct TrainObserver {
  std::function<void(const EpochRecord&)> on_epoch;
};

TrainResult train(const WindowedDataset& train_set, const WindowedDataset& val_set,
                  const NormalizationSpec& norm, const TrainConfig& cfg,
                  const TrainObserver& observer = {});

// Normalized actor input for the current slot: the last tau-1 (s, a) pairs of
// history followed by the current state.
Eigen::VectorXd actor_input(std::span<const TraceRecord> history, std::span<const double> state,
                            const NormalizationSpec& norm, std::size_t tau);

// Physical action for the current slot, clipped to bounds. history must hold
// exactly tau-1 records (their readings are ignored).
std::vector<double> act(const Actor& actor, std::span<const TraceRecord> history,
                        std::span<const double> state, const NormalizationSpec& norm,
                        const ActionBounds& bounds, std::size_t tau);

}  // namespace dccool
