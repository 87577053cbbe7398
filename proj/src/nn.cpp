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

#include "dccool/nn.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dccool/error.hpp"

namespace dccool::nn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::softplus: return "softplus";
  }
  return "unknown";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "linear") return Activation::linear;
  if (name == "relu") return Activation::relu;
  if (name == "softplus") return Activation::softplus;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

double stable_softplus(double x) {
  if (x > 30.0) return x + std::exp(-x);
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    if (l.bias.size() != l.out_size())
      throw DimensionError("layer " + std::to_string(k) + ": bias has " +
                           std::to_string(l.bias.size()) + " entries, expected " +
                           std::to_string(l.out_size()));
    if (l.in_size() == 0 || l.out_size() == 0)
      throw DimensionError("layer " + std::to_string(k) + " is empty");
    if (k > 0 && layers_[k - 1].out_size() != l.in_size())
      throw DimensionError("layer " + std::to_string(k) + " expects " +
                           std::to_string(l.in_size()) + " inputs but layer " +
                           std::to_string(k - 1) + " produces " +
                           std::to_string(layers_[k - 1].out_size()));
  }
}

Index Network::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().in_size();
}

Index Network::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().out_size();
}

Index Network::num_parameters() const {
  Index n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

bool operator==(const Network& a, const Network& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t k = 0; k < a.layers_.size(); ++k) {
    const Layer& x = a.layers_[k];
    const Layer& y = b.layers_[k];
    if (x.activation != y.activation) return false;
    if (x.weights.rows() != y.weights.rows() || x.weights.cols() != y.weights.cols())
      return false;
    if (x.weights != y.weights || x.bias != y.bias) return false;
  }
  return true;
}

Network init_network(std::span<const Index> layer_sizes,
                     std::span<const Activation> activations,
                     std::uint64_t seed, double stddev) {
  if (layer_sizes.size() < 2)
    throw ConfigError("a network needs at least an input and an output size");
  if (activations.size() != layer_sizes.size() - 1)
    throw ConfigError("expected " + std::to_string(layer_sizes.size() - 1) +
                      " activations, got " + std::to_string(activations.size()));
  for (Index s : layer_sizes)
    if (s <= 0) throw ConfigError("layer sizes must be positive");
  if (!(stddev >= 0.0)) throw ConfigError("initial weight stddev must be >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, stddev);
  std::vector<Layer> layers;
  layers.reserve(activations.size());
  for (std::size_t k = 0; k < activations.size(); ++k) {
    Layer l;
    l.weights.resize(layer_sizes[k + 1], layer_sizes[k]);
    // Row-major draw order so the serialized layout matches the stream.
    for (Index r = 0; r < l.weights.rows(); ++r)
      for (Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = gauss(rng);
    l.bias = Eigen::VectorXd::Zero(layer_sizes[k + 1]);
    l.activation = activations[k];
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

namespace {

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::linear: return z;
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::softplus: return z.unaryExpr([](double v) { return stable_softplus(v); });
  }
  return z;
}

// d activation / dz given the pre-activation z and post-activation y.
Eigen::MatrixXd activation_slope(Activation a, const Eigen::MatrixXd& z,
                                 const Eigen::MatrixXd& y) {
  switch (a) {
    case Activation::tanh: return (1.0 - y.array().square()).matrix();
    case Activation::linear: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::relu:
      return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::softplus: return z.unaryExpr([](double v) { return sigmoid(v); });
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

}  // namespace

void Gradients::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : bias) b *= factor;
  if (input.size() > 0) input *= factor;
}

Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& x,
                        ForwardCache* cache) {
  if (net.empty()) throw DimensionError("forward on an empty network");
  if (x.rows() != net.input_dim())
    throw DimensionError("forward: input has " + std::to_string(x.rows()) +
                         " rows, network expects " + std::to_string(net.input_dim()));
  if (cache) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  Eigen::MatrixXd h = x;
  for (const Layer& l : net.layers()) {
    Eigen::MatrixXd z = l.weights * h;
    z.colwise() += l.bias;
    Eigen::MatrixXd y = activate(l.activation, z);
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre_activations.push_back(std::move(z));
    }
    h = std::move(y);
  }
  if (cache) cache->output = h;
  return h;
}

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x) {
  Eigen::MatrixXd y = forward(net, Eigen::MatrixXd(x));
  return y.col(0);
}

Gradients backprop(const Network& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& grad_output, bool want_input_grad) {
  const std::size_t n = net.num_layers();
  if (cache.inputs.size() != n || cache.pre_activations.size() != n)
    throw DimensionError("backprop: cache does not match the network");
  if (grad_output.rows() != net.output_dim() ||
      grad_output.cols() != cache.output.cols())
    throw DimensionError("backprop: grad_output is " + std::to_string(grad_output.rows()) +
                         "x" + std::to_string(grad_output.cols()) + ", expected " +
                         std::to_string(net.output_dim()) + "x" +
                         std::to_string(cache.output.cols()));

  Gradients g;
  g.weights.resize(n);
  g.bias.resize(n);
  Eigen::MatrixXd delta = grad_output;  // dL/d(layer output)
  for (std::size_t k = n; k-- > 0;) {
    const Layer& l = net.layer(k);
    const Eigen::MatrixXd& z = cache.pre_activations[k];
    const Eigen::MatrixXd& post = (k + 1 < n) ? cache.inputs[k + 1] : cache.output;
    if (l.activation != Activation::linear)
      delta = delta.cwiseProduct(activation_slope(l.activation, z, post));
    g.weights[k] = delta * cache.inputs[k].transpose();
    g.bias[k] = delta.rowwise().sum();
    if (k > 0 || want_input_grad) delta = l.weights.transpose() * delta;
  }
  if (want_input_grad) g.input = std::move(delta);
  return g;
}

AdadeltaState make_adadelta_state(const Network& net, double rho, double eps) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("adadelta rho must lie in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adadelta eps must be positive");
  AdadeltaState s;
  s.rho = rho;
  s.eps = eps;
  for (const Layer& l : net.layers()) {
    s.grad_sq_w.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    s.delta_sq_w.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    s.grad_sq_b.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    s.delta_sq_b.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return s;
}

namespace {

template <typename Param, typename Acc>
void adadelta_update(Param& w, Acc& grad_sq, Acc& delta_sq, const Acc& g,
                     double rho, double eps) {
  grad_sq = (rho * grad_sq.array() + (1.0 - rho) * g.array().square()).matrix();
  Acc delta = -((delta_sq.array() + eps).sqrt() / (grad_sq.array() + eps).sqrt() *
                g.array()).matrix();
  delta_sq = (rho * delta_sq.array() + (1.0 - rho) * delta.array().square()).matrix();
  w += delta;
}

}  // namespace

void adadelta_step(Network& net, AdadeltaState& state, const Gradients& grads) {
  const std::size_t n = net.num_layers();
  if (state.grad_sq_w.size() != n || grads.weights.size() != n || grads.bias.size() != n)
    throw DimensionError("adadelta_step: layer count mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    Layer& l = net.layer(k);
    if (grads.weights[k].rows() != l.weights.rows() ||
        grads.weights[k].cols() != l.weights.cols() ||
        grads.bias[k].size() != l.bias.size() ||
        state.grad_sq_w[k].rows() != l.weights.rows() ||
        state.grad_sq_w[k].cols() != l.weights.cols() ||
        state.grad_sq_b[k].size() != l.bias.size())
      throw DimensionError("adadelta_step: shape mismatch in layer " + std::to_string(k));
    adadelta_update(l.weights, state.grad_sq_w[k], state.delta_sq_w[k], grads.weights[k],
                    state.rho, state.eps);
    adadelta_update(l.bias, state.grad_sq_b[k], state.delta_sq_b[k], grads.bias[k],
                    state.rho, state.eps);
  }
}

}  // namespace dccool::nn
