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

#include "dccool/cca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dccool/error.hpp"

namespace dccool {

namespace {

// Neumaier-compensated running sum; validation means must not depend on
// how rows are grouped.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::vector<double> v(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, j);
  return v;
}

std::vector<nn::Index> layer_sizes(nn::Index in, const std::vector<nn::Index>& hidden,
                                   nn::Index out) {
  std::vector<nn::Index> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

}  // namespace

Critic::Critic(nn::Network body, CostParams cost, NormalizationSpec norm, std::size_t tau)
    : body_(std::move(body)), cost_(std::move(cost)), norm_(std::move(norm)), tau_(tau) {
  if (tau_ == 0) throw ConfigError("critic: tau must be >= 1");
  cost_.validate(reading_dim());
  if (cost_.fan_law && cost_.fan_law->action_channel >= action_dim())
    throw ConfigError("cost.fan_law.action_channel out of range");
  const auto want_in = static_cast<nn::Index>(tau_ * (state_dim() + action_dim()));
  if (body_.input_dim() != want_in)
    throw DimensionError("critic body takes " + std::to_string(body_.input_dim()) +
                         " inputs, window needs " + std::to_string(want_in));
  if (body_.output_dim() != static_cast<nn::Index>(reading_dim()))
    throw DimensionError("critic body emits " + std::to_string(body_.output_dim()) +
                         " values, readings have " + std::to_string(reading_dim()));
}

double Critic::energy_from_action(const Eigen::MatrixXd& xq, Eigen::Index col) const {
  const FanLaw& f = *cost_.fan_law;
  const auto row = static_cast<Eigen::Index>((tau_ - 1) * (state_dim() + action_dim()) +
                                             state_dim() + f.action_channel);
  const double flow = norm_.denormalize(Role::action, f.action_channel, xq(row, col));
  return fan_power(flow, f.rated_flow, f.rated_power);
}

Eigen::MatrixXd Critic::predict_readings(const Eigen::MatrixXd& xq) const {
  return nn::forward(body_, xq);
}

Eigen::VectorXd Critic::true_cost(const Eigen::MatrixXd& xq, const Eigen::MatrixXd& yr) const {
  Eigen::VectorXd y(yr.cols());
  for (Eigen::Index j = 0; j < yr.cols(); ++j) {
    const std::vector<double> phys = norm_.denormalize(Role::reading, column(yr, j));
    if (cost_.fan_law)
      y(j) = energy_from_action(xq, j) + overheat_penalty(phys, cost_);
    else
      y(j) = cost(phys, cost_);
  }
  return y;
}

Eigen::VectorXd Critic::evaluate(const Eigen::MatrixXd& xq) const {
  return true_cost(xq, predict_readings(xq));
}

Eigen::MatrixXd Critic::head_grad(const Eigen::MatrixXd& body_out,
                                  const Eigen::VectorXd& weights) const {
  Eigen::MatrixXd g(body_out.rows(), body_out.cols());
  for (Eigen::Index j = 0; j < body_out.cols(); ++j) {
    const std::vector<double> phys = norm_.denormalize(Role::reading, column(body_out, j));
    std::vector<double> dc = cost_gradient(phys, cost_);
    if (cost_.fan_law) dc[cost_.energy_channel] = 0.0;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      g(i, j) = weights(j) * dc[static_cast<std::size_t>(i)] *
                norm_.scale(Role::reading, static_cast<std::size_t>(i));
  }
  return g;
}

Critic::CostGrad Critic::evaluate_with_input_grad(const Eigen::MatrixXd& xq,
                                                  const Eigen::VectorXd& weights) const {
  if (weights.size() != xq.cols()) throw DimensionError("cost weights do not match batch");
  nn::ForwardCache cache;
  Eigen::MatrixXd out = nn::forward(body_, xq, &cache);
  CostGrad r;
  r.cost = true_cost(xq, out);
  nn::Gradients g = nn::backprop(body_, cache, head_grad(out, weights), true);
  r.input = std::move(g.input);
  if (cost_.fan_law) {
    const FanLaw& f = *cost_.fan_law;
    const auto row = static_cast<Eigen::Index>((tau_ - 1) * (state_dim() + action_dim()) +
                                               state_dim() + f.action_channel);
    const double s = norm_.scale(Role::action, f.action_channel);
    for (Eigen::Index j = 0; j < xq.cols(); ++j) {
      const double flow = norm_.denormalize(Role::action, f.action_channel, xq(row, j));
      r.input(row, j) += weights(j) * fan_power_slope(flow, f.rated_flow, f.rated_power) * s;
    }
  }
  return r;
}

nn::Gradients Critic::cost_param_grad(const Eigen::MatrixXd& xq,
                                      const Eigen::VectorXd& weights) const {
  nn::ForwardCache cache;
  Eigen::MatrixXd out = nn::forward(body_, xq, &cache);
  return nn::backprop(body_, cache, head_grad(out, weights));
}

void TrainConfig::validate(std::size_t train_rows) const {
  if (max_epoch < 1) throw ConfigError("train.max_epoch must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (batch_size > train_rows)
    throw ConfigError("train.batch_size " + std::to_string(batch_size) +
                      " exceeds the " + std::to_string(train_rows) + " training rows");
  if (tau < 1) throw ConfigError("train.tau must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("train.rho must lie in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("train.eps must be positive");
  if (!(init_stddev >= 0.0)) throw ConfigError("train.init_stddev must be >= 0");
  if (critic_activations.size() != critic_hidden.size() + 1)
    throw ConfigError("train.critic_activations needs one entry per layer");
  if (actor_activations.size() != actor_hidden.size() + 1)
    throw ConfigError("train.actor_activations needs one entry per layer");
  if (critic_activations.back() != nn::Activation::linear)
    throw ConfigError("the critic's reading layer must be linear");
  if (actor_activations.back() != nn::Activation::tanh)
    throw ConfigError("the actor's output layer must be tanh");
  if (!(underestimation_margin >= 0.0))
    throw ConfigError("train.underestimation_margin must be >= 0");
}

Critic make_critic(const TrainConfig& cfg, const NormalizationSpec& norm, std::uint64_t seed) {
  const auto in = static_cast<nn::Index>(cfg.tau * (norm.state.size() + norm.action.size()));
  const auto sizes =
      layer_sizes(in, cfg.critic_hidden, static_cast<nn::Index>(norm.readings.size()));
  return Critic(nn::init_network(sizes, cfg.critic_activations, seed, cfg.init_stddev), cfg.cost,
                norm, cfg.tau);
}

Actor make_actor(const TrainConfig& cfg, const NormalizationSpec& norm, std::uint64_t seed) {
  const auto in = static_cast<nn::Index>(cfg.tau * (norm.state.size() + norm.action.size()) -
                                         norm.action.size());
  const auto sizes = layer_sizes(in, cfg.actor_hidden, static_cast<nn::Index>(norm.action.size()));
  return Actor{nn::init_network(sizes, cfg.actor_activations, seed, cfg.init_stddev)};
}

double critic_batch_update(Critic& critic, const Eigen::MatrixXd& xq, const Eigen::MatrixXd& yr,
                           nn::AdadeltaState& opt) {
  if (xq.cols() == 0) throw DataError("critic_batch_update: empty batch");
  if (yr.cols() != xq.cols() || yr.rows() != critic.body().output_dim())
    throw DimensionError("critic_batch_update: targets do not match the batch");
  nn::ForwardCache cache;
  Eigen::MatrixXd out = nn::forward(critic.body(), xq, &cache);
  const double m = static_cast<double>(xq.cols());
  Eigen::MatrixXd diff = out - yr;
  const double loss = diff.squaredNorm() / m;
  nn::Gradients g = nn::backprop(critic.body(), cache, (2.0 / m) * diff);
  nn::adadelta_step(critic.body(), opt, g);
  return loss;
}

double actor_batch_update(Actor& actor, const Critic& critic, const Eigen::MatrixXd& xmu,
                          nn::AdadeltaState& opt) {
  if (xmu.cols() == 0) throw DataError("actor_batch_update: empty batch");
  const Eigen::Index na = static_cast<Eigen::Index>(critic.action_dim());
  nn::ForwardCache cache;
  Eigen::MatrixXd a = nn::forward(actor.net, xmu, &cache);
  Eigen::MatrixXd xq(xmu.rows() + na, xmu.cols());
  xq.topRows(xmu.rows()) = xmu;
  xq.bottomRows(na) = a;
  const double m = static_cast<double>(xmu.cols());
  Critic::CostGrad cg =
      critic.evaluate_with_input_grad(xq, Eigen::VectorXd::Constant(xmu.cols(), 1.0 / m));
  Eigen::MatrixXd ga = cg.input.bottomRows(na);
  for (Eigen::Index j = 0; j < ga.cols(); ++j)
    for (Eigen::Index i = 0; i < na; ++i)
      if ((a(i, j) > kActorEdge && ga(i, j) < 0.0) || (a(i, j) < -kActorEdge && ga(i, j) > 0.0))
        ga(i, j) = 0.0;
  nn::Gradients g = nn::backprop(actor.net, cache, ga);
  nn::adadelta_step(actor.net, opt, g);
  return cg.cost.mean();
}

double validate_critic(const Critic& critic, const WindowedDataset& val, bool due) {
  if (val.rows() == 0) throw DataError("validate_critic: empty validation set");
  const Eigen::VectorXd pred = critic.evaluate(val.xq);
  const Eigen::VectorXd truth = critic.true_cost(val.xq, val.yr);
  CompensatedSum s;
  for (Eigen::Index j = 0; j < pred.size(); ++j) {
    const double d = truth(j) - pred(j);
    s.add(due ? std::max(d, 0.0) : d * d);
  }
  return s.value() / static_cast<double>(pred.size());
}

double validate_actor(const Actor& actor, const Critic& critic, const Eigen::MatrixXd& xmu) {
  if (xmu.cols() == 0) throw DataError("validate_actor: empty validation set");
  const Eigen::Index na = static_cast<Eigen::Index>(critic.action_dim());
  Eigen::MatrixXd xq(xmu.rows() + na, xmu.cols());
  xq.topRows(xmu.rows()) = xmu;
  xq.bottomRows(na) = nn::forward(actor.net, xmu);
  const Eigen::VectorXd c = critic.evaluate(xq);
  CompensatedSum s;
  for (Eigen::Index j = 0; j < c.size(); ++j) s.add(c(j));
  return s.value() / static_cast<double>(c.size());
}

std::vector<double> reading_mae(const Critic& critic, const WindowedDataset& val) {
  const Eigen::MatrixXd pred = critic.predict_readings(val.xq);
  std::vector<double> mae(static_cast<std::size_t>(pred.rows()));
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    CompensatedSum s;
    for (Eigen::Index j = 0; j < pred.cols(); ++j) s.add(std::abs(pred(i, j) - val.yr(i, j)));
    mae[static_cast<std::size_t>(i)] = s.value() / static_cast<double>(pred.cols());
  }
  return mae;
}

double cost_scale(const Critic& critic, const WindowedDataset& data) {
  const Eigen::VectorXd y = critic.true_cost(data.xq, data.yr);
  const double spread = y.maxCoeff() - y.minCoeff();
  const double margin = critic.normalization().margin;
  return spread > 0.0 ? spread / (2.0 * (1.0 - margin)) : 1.0;
}

double underestimation_fraction(const Critic& critic, const WindowedDataset& val, double margin,
                                double scale) {
  const Eigen::VectorXd pred = critic.evaluate(val.xq);
  const Eigen::VectorXd truth = critic.true_cost(val.xq, val.yr);
  std::size_t under = 0;
  for (Eigen::Index j = 0; j < pred.size(); ++j)
    if ((pred(j) - truth(j)) / scale < -margin) ++under;
  return static_cast<double>(under) / static_cast<double>(pred.size());
}

TrainResult train(const WindowedDataset& train_set, const WindowedDataset& val_set,
                  const NormalizationSpec& norm, const TrainConfig& cfg,
                  const TrainObserver& observer) {
  const auto n = static_cast<std::size_t>(train_set.rows());
  cfg.validate(n);
  if (val_set.rows() == 0) throw DataError("train: empty validation set");
  if (train_set.tau != cfg.tau || val_set.tau != cfg.tau)
    throw ConfigError("train: dataset windows were built with a different tau");

  // Independent streams for the two initializations and the batch order.
  std::seed_seq seq{cfg.seed, std::uint64_t{0x5eed}};
  std::array<std::uint64_t, 3> seeds{};
  {
    std::vector<std::uint32_t> words(6);
    seq.generate(words.begin(), words.end());
    for (std::size_t i = 0; i < 3; ++i)
      seeds[i] = (std::uint64_t{words[2 * i]} << 32) | words[2 * i + 1];
  }
  Critic critic = make_critic(cfg, norm, seeds[0]);
  Actor actor = make_actor(cfg, norm, seeds[1]);
  std::mt19937_64 shuffle_rng(seeds[2]);
  nn::AdadeltaState critic_opt = nn::make_adadelta_state(critic.body(), cfg.rho, cfg.eps);
  nn::AdadeltaState actor_opt = nn::make_adadelta_state(actor.net, cfg.rho, cfg.eps);

  TrainResult result{critic, actor, {}, critic, critic};
  TrainReport& rep = result.report;
  rep.due = cfg.due;
  rep.cost_scale = cost_scale(critic, train_set);

  constexpr double kUnset = 1e100;
  double best_q = kUnset, best_mse = kUnset, best_due = kUnset, best_mu = kUnset;

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t batches = n / cfg.batch_size;
  const auto m = static_cast<Eigen::Index>(cfg.batch_size);

  for (std::size_t epoch = 1; epoch <= cfg.max_epoch; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    CompensatedSum loss;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(b) * m,
                                          order.begin() + static_cast<std::ptrdiff_t>(b + 1) * m);
      const Eigen::MatrixXd xq = train_set.xq(Eigen::all, idx);
      const Eigen::MatrixXd yr = train_set.yr(Eigen::all, idx);
      const Eigen::MatrixXd xmu = train_set.xmu(Eigen::all, idx);
      if (cfg.actor_after_critic) {
        loss.add(critic_batch_update(critic, xq, yr, critic_opt));
        actor_batch_update(actor, critic, xmu, actor_opt);
      } else {
        const Critic before = critic;
        loss.add(critic_batch_update(critic, xq, yr, critic_opt));
        actor_batch_update(actor, before, xmu, actor_opt);
      }
    }
    rec.critic_train_loss = loss.value() / static_cast<double>(batches);

    rec.critic_val_mse = validate_critic(critic, val_set, false);
    rec.critic_val_due = validate_critic(critic, val_set, true);
    if (rec.critic_val_mse < best_mse) {
      best_mse = rec.critic_val_mse;
      result.critic_mse = critic;
      rep.mse_checkpoint.epoch = epoch;
      rep.mse_checkpoint.error = best_mse;
    }
    if (rec.critic_val_due < best_due) {
      best_due = rec.critic_val_due;
      result.critic_due = critic;
      rep.due_checkpoint.epoch = epoch;
      rep.due_checkpoint.error = best_due;
    }
    const double eq = cfg.due ? rec.critic_val_due : rec.critic_val_mse;
    if (eq < best_q) {
      best_q = eq;
      result.critic = critic;
      rep.best_critic_epoch = epoch;
      rep.best_critic_error = eq;
      rec.critic_improved = true;
    }

    if (cfg.mu_val_reset_period > 0 && epoch > 1 && (epoch - 1) % cfg.mu_val_reset_period == 0) {
      best_mu = kUnset;
      rec.actor_reset = true;
    }
    rec.actor_val = validate_actor(actor, result.critic, val_set.xmu);
    if (rec.actor_val < best_mu) {
      best_mu = rec.actor_val;
      result.actor = actor;
      rep.best_actor_epoch = epoch;
      rep.best_actor_error = rec.actor_val;
      rec.actor_improved = true;
    }
    rep.epochs.push_back(rec);
    if (observer.on_epoch) observer.on_epoch(rec);
  }

  for (auto* c : {&rep.mse_checkpoint, &rep.due_checkpoint}) {
    const Critic& k = (c == &rep.mse_checkpoint) ? result.critic_mse : result.critic_due;
    c->mae = reading_mae(k, val_set);
    c->underestimation_fraction =
        underestimation_fraction(k, val_set, cfg.underestimation_margin, rep.cost_scale);
  }
  rep.best_critic_mae = cfg.due ? rep.due_checkpoint.mae : rep.mse_checkpoint.mae;
  return result;
}

Eigen::VectorXd actor_input(std::span<const TraceRecord> history, std::span<const double> state,
                            const NormalizationSpec& norm, std::size_t tau) {
  if (tau == 0) throw ConfigError("tau must be >= 1");
  if (history.size() != tau - 1)
    throw DimensionError("act: history holds " + std::to_string(history.size()) +
                         " records, tau = " + std::to_string(tau) + " needs " +
                         std::to_string(tau - 1));
  const std::size_t ns = norm.state.size(), na = norm.action.size();
  Eigen::VectorXd x(static_cast<Eigen::Index>((tau - 1) * (ns + na) + ns));
  Eigen::Index row = 0;
  for (const TraceRecord& r : history) {
    for (double v : norm.normalize(Role::state, r.state)) x(row++) = v;
    for (double v : norm.normalize(Role::action, r.action)) x(row++) = v;
  }
  for (double v : norm.normalize(Role::state, state)) x(row++) = v;
  return x;
}

std::vector<double> act(const Actor& actor, std::span<const TraceRecord> history,
                        std::span<const double> state, const NormalizationSpec& norm,
                        const ActionBounds& bounds, std::size_t tau) {
  const Eigen::VectorXd a = nn::forward(actor.net, actor_input(history, state, norm, tau));
  std::vector<double> z(a.data(), a.data() + a.size());
  return bounds.clip(norm.denormalize(Role::action, z));
}

}  // namespace dccool
