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

// Dense feed-forward networks with exact backpropagation and Adadelta.
//
// Batches are stored one sample per column: a batch of B inputs for a
// network with input width n is an n x B matrix. All arithmetic is double
// precision and single threaded, so identical seeds and data order give
// bit-identical results.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace dccool::nn {

using Index = Eigen::Index;

enum class Activation { tanh, linear, relu, softplus };

std::string_view to_string(Activation a);
// Throws ConfigError for unknown names.
Activation activation_from_string(std::string_view name);

// ln(1 + exp(x)) without overflow for large |x|.
double stable_softplus(double x);
double sigmoid(double x);

struct Layer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::linear;

  Index in_size() const { return weights.cols(); }
  Index out_size() const { return weights.rows(); }
};

class Network {
 public:
  Network() = default;
  // Throws DimensionError unless every layer is self-consistent and
  // adjacent layers chain.
  explicit Network(std::vector<Layer> layers);

  Index input_dim() const;
  Index output_dim() const;
  std::size_t num_layers() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  Index num_parameters() const;

  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  Layer& layer(std::size_t i) { return layers_.at(i); }
  const std::vector<Layer>& layers() const { return layers_; }

  friend bool operator==(const Network& a, const Network& b);

 private:
  std::vector<Layer> layers_;
};

// Weights i.i.d. N(0, stddev^2), biases zero. layer_sizes has one more entry
// than activations.
Network init_network(std::span<const Index> layer_sizes,
                     std::span<const Activation> activations,
                     std::uint64_t seed, double stddev = 0.01);

// Per-layer inputs and pre-activations of one forward pass.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> pre_activations;
  Eigen::MatrixXd output;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
  // dL/dx for the network input, filled only when requested.
  Eigen::MatrixXd input;

  void scale(double factor);
};

// x is input_dim x B. The cache, when given, is overwritten.
Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& x,
                        ForwardCache* cache = nullptr);
Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x);

// Gradients of L with respect to every parameter, summed over the batch
// columns, given dL/dy = grad_output (output_dim x B).
Gradients backprop(const Network& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& grad_output,
                   bool want_input_grad = false);

struct AdadeltaState {
  std::vector<Eigen::MatrixXd> grad_sq_w;
  std::vector<Eigen::VectorXd> grad_sq_b;
  std::vector<Eigen::MatrixXd> delta_sq_w;
  std::vector<Eigen::VectorXd> delta_sq_b;
  double rho = 0.95;
  double eps = 1e-6;
};

AdadeltaState make_adadelta_state(const Network& net, double rho = 0.95,
                                  double eps = 1e-6);

// Per parameter:
//   E[g^2]  <- rho E[g^2] + (1 - rho) g^2
//   delta    = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
//   E[dx^2] <- rho E[dx^2] + (1 - rho) delta^2
//   w       += delta
void adadelta_step(Network& net, AdadeltaState& state, const Gradients& grads);

}  // namespace dccool::nn
