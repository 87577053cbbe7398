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

#include "dccool/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dccool/error.hpp"
#include "dccool/format.hpp"

namespace dccool {

namespace fs = std::filesystem;

namespace {

template <typename T>
void get_opt(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

template <std::size_t N>
void get_array(const Json& j, const char* key, std::array<double, N>& out,
               const std::string& where) {
  if (!j.contains(key)) return;
  std::vector<double> v;
  get_opt(j, key, v, where);
  if (v.size() != N)
    throw ConfigError(where + "." + key + " needs " + std::to_string(N) + " values");
  std::copy(v.begin(), v.end(), out.begin());
}

void check_keys(const Json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* n) { return k == n; }))
      throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

Json plant_to_json(const PlantModel& m) {
  return Json{{"timestep_minutes", m.timestep_minutes},
              {"area_m2", m.area_m2},
              {"load_density_kw_m2", m.load_density_kw_m2},
              {"ambient_ua", m.ambient_ua},
              {"thermal_mass", m.thermal_mass},
              {"initial_zone_temps", m.initial_zone_temps},
              {"gain", m.gain},
              {"base_power", m.base_power},
              {"power_decay", m.power_decay},
              {"power_reference", m.power_reference},
              {"ambient_sensitivity", m.ambient_sensitivity},
              {"reference_ambient", m.reference_ambient},
              {"overhead_kw", m.overhead_kw},
              {"load_floor", m.load_floor},
              {"temp_noise_std", m.temp_noise_std},
              {"pue_noise_std", m.pue_noise_std}};
}

void plant_from_json(const Json& j, PlantModel& m) {
  const std::string w = "plant";
  check_keys(j,
             {"timestep_minutes", "area_m2", "load_density_kw_m2", "ambient_ua", "thermal_mass",
              "initial_zone_temps", "gain", "base_power", "power_decay", "power_reference",
              "ambient_sensitivity", "reference_ambient", "overhead_kw", "load_floor",
              "temp_noise_std", "pue_noise_std"},
             w);
  get_opt(j, "timestep_minutes", m.timestep_minutes, w);
  get_array(j, "area_m2", m.area_m2, w);
  get_array(j, "load_density_kw_m2", m.load_density_kw_m2, w);
  get_array(j, "ambient_ua", m.ambient_ua, w);
  get_array(j, "thermal_mass", m.thermal_mass, w);
  get_array(j, "initial_zone_temps", m.initial_zone_temps, w);
  get_array(j, "gain", m.gain, w);
  get_array(j, "base_power", m.base_power, w);
  get_array(j, "power_decay", m.power_decay, w);
  get_array(j, "power_reference", m.power_reference, w);
  get_array(j, "ambient_sensitivity", m.ambient_sensitivity, w);
  get_opt(j, "reference_ambient", m.reference_ambient, w);
  get_opt(j, "overhead_kw", m.overhead_kw, w);
  get_opt(j, "load_floor", m.load_floor, w);
  get_opt(j, "temp_noise_std", m.temp_noise_std, w);
  get_opt(j, "pue_noise_std", m.pue_noise_std, w);
}

Json scenario_to_json(const ScenarioSpec& s) {
  return Json{{"length", s.length},
              {"timestep_minutes", s.timestep_minutes},
              {"ambient_mean", s.ambient_mean},
              {"ambient_amplitude", s.ambient_amplitude},
              {"ambient_jitter", s.ambient_jitter},
              {"load_mean", s.load_mean},
              {"load_amplitude", s.load_amplitude},
              {"load_weekly_amplitude", s.load_weekly_amplitude},
              {"load_jitter", s.load_jitter},
              {"seed", s.seed}};
}

void scenario_from_json(const Json& j, ScenarioSpec& s) {
  const std::string w = "scenario";
  check_keys(j,
             {"length", "timestep_minutes", "ambient_mean", "ambient_amplitude", "ambient_jitter",
              "load_mean", "load_amplitude", "load_weekly_amplitude", "load_jitter", "seed"},
             w);
  get_opt(j, "length", s.length, w);
  get_opt(j, "timestep_minutes", s.timestep_minutes, w);
  get_opt(j, "ambient_mean", s.ambient_mean, w);
  get_opt(j, "ambient_amplitude", s.ambient_amplitude, w);
  get_opt(j, "ambient_jitter", s.ambient_jitter, w);
  get_opt(j, "load_mean", s.load_mean, w);
  get_opt(j, "load_amplitude", s.load_amplitude, w);
  get_opt(j, "load_weekly_amplitude", s.load_weekly_amplitude, w);
  get_opt(j, "load_jitter", s.load_jitter, w);
  get_opt(j, "seed", s.seed, w);
}

std::string mode_name(Mode m) { return m == Mode::two_zone_sim ? "two_zone_sim" : "trace_only"; }

Mode mode_from_string(const std::string& s) {
  if (s == "two_zone_sim") return Mode::two_zone_sim;
  if (s == "trace_only") return Mode::trace_only;
  throw ConfigError("unknown mode '" + s + "' (expected two_zone_sim or trace_only)");
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

Trace load_trace_for(const ExperimentConfig& c) {
  const fs::path p = trace_file(c);
  if (!fs::exists(p))
    throw IoError("trace " + p.string() + " not found" +
                  (c.mode == Mode::two_zone_sim ? " (run generate-trace first)" : ""));
  return load_csv(p);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Uniform evaluation result for both modes.
struct EvalResult {
  std::size_t steps = 0;
  std::size_t eval_begin = 0;
  double mean_energy = 0.0;
  double mean_cost = 0.0;
  std::vector<double> max_temps;
  // trace_only: same quantities for the recorded behavior, from the trace.
  std::optional<double> recorded_energy;
  std::optional<double> recorded_cost;
};

std::vector<std::string> temp_names(const CostParams& cost,
                                    const std::vector<std::string>& reading_names) {
  std::vector<std::string> out;
  for (auto k : cost.temp_channels) out.push_back(reading_names.at(k));
  return out;
}

Json eval_to_json(const EvalResult& r, ControllerKind kind, Mode mode,
                  const std::vector<std::string>& tnames, const std::string& energy_name) {
  Json temps = Json::object();
  for (std::size_t k = 0; k < tnames.size(); ++k) temps[tnames[k]] = r.max_temps[k];
  Json j{{"controller", std::string(to_string(kind))},
         {"mode", mode_name(mode)},
         {"eval_begin", r.eval_begin},
         {"steps", r.steps},
         {"energy_name", energy_name},
         {"mean_energy", r.mean_energy},
         {"max_temps", temps},
         {"mean_cost", r.mean_cost}};
  if (r.recorded_energy) {
    j["recorded_mean_energy"] = *r.recorded_energy;
    j["recorded_mean_cost"] = *r.recorded_cost;
    j["energy_saving_pct"] = 100.0 * (*r.recorded_energy - r.mean_energy) / *r.recorded_energy;
  }
  return j;
}

struct Checkpoints {
  Critic critic;
  PolicyCheckpoint policy;
};

Checkpoints load_checkpoints(const ExperimentConfig& c, bool need_actor) {
  Checkpoints ck;
  if (!fs::exists(critic_file(c)))
    throw IoError("critic checkpoint " + critic_file(c).string() + " not found (run train first)");
  ck.critic = critic_from_json(read_json_file(critic_file(c)));
  if (need_actor) {
    if (!fs::exists(actor_file(c)))
      throw IoError("actor checkpoint " + actor_file(c).string() + " not found (run train first)");
    ck.policy = policy_from_json(read_json_file(actor_file(c)));
  }
  return ck;
}

void write_steps_csv(const fs::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  if (!out) throw IoError("error while writing " + path.string());
}

std::uint64_t step_seed(std::uint64_t base, std::size_t step) {
  return base * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(step);
}

EvalResult evaluate_sim(const ExperimentConfig& c, ControllerKind kind, bool write_files) {
  const Trace trace = load_trace_for(c);
  const PreparedData data = prepare_data(trace, c.train.tau, c.train_fraction);
  Scenario scen = build_scenario(c);
  std::size_t end = scen.size();
  if (c.eval.horizon > 0) end = std::min(end, data.eval_begin + c.eval.horizon);
  scen.ambient.resize(end);
  scen.load.resize(end);

  PlantModel plant = c.plant;
  plant.bounds = c.bounds;
  const FixedController fixed = resolve_fixed_controller(c);
  Controller fixed_ctrl = [&](const ControllerInput& in) {
    return fixed_policy(in.state, fixed, c.bounds);
  };

  Controller ctrl;
  Checkpoints ck;
  if (kind == ControllerKind::fixed) {
    ctrl = fixed_ctrl;
  } else {
    ck = load_checkpoints(c, kind == ControllerKind::cca);
    const std::size_t tau = ck.critic.tau();
    if (kind == ControllerKind::cca) {
      const PolicyCheckpoint& p = ck.policy;
      ctrl = [&p](const ControllerInput& in) {
        const auto hist = in.history.subspan(in.history.size() - (p.tau - 1));
        return act(p.actor, hist, in.state, p.norm, p.bounds, p.tau);
      };
    } else {
      ctrl = [&ck, &c, tau](const ControllerInput& in) {
        const auto hist = in.history.subspan(in.history.size() - (tau - 1));
        const Eigen::VectorXd xmu = actor_input(hist, in.state, ck.critic.normalization(), tau);
        DEConfig de = c.de;
        de.seed = step_seed(c.de.seed, in.step);
        return ts_optimize(ck.critic, xmu, c.bounds, de).action;
      };
    }
  }

  RolloutOptions opts;
  opts.eval_begin = data.eval_begin;
  opts.warmup = fixed_ctrl;
  const RolloutMetrics m = rollout(plant, scen, ctrl, c.cost, opts);

  EvalResult r;
  r.steps = m.steps;
  r.eval_begin = data.eval_begin;
  r.mean_energy = m.mean_pue;
  r.mean_cost = m.mean_cost;
  r.max_temps = m.max_temps;

  if (write_files) {
    std::vector<std::string> header{"t"};
    for (const auto& n : plant_state_names()) header.push_back("s:" + n);
    for (const auto& b : c.bounds.channels) header.push_back("a:" + b.name);
    for (const auto& n : plant_reading_names()) header.push_back("r:" + n);
    header.push_back("cost");
    std::vector<std::vector<double>> rows;
    rows.reserve(m.series.size());
    for (const auto& s : m.series) {
      std::vector<double> row{s.t};
      row.insert(row.end(), s.state.begin(), s.state.end());
      row.insert(row.end(), s.action.begin(), s.action.end());
      row.insert(row.end(), s.readings.begin(), s.readings.end());
      row.push_back(s.cost);
      rows.push_back(std::move(row));
    }
    write_steps_csv(c.output_dir / ("steps_" + std::string(to_string(kind)) + ".csv"), header,
                    rows);
  }
  return r;
}

// Without a plant the controllers are scored by the critic on the held-out
// windows: predicted readings and cost for the chosen action, next to the
// recorded behavior.
EvalResult evaluate_trace_only(const ExperimentConfig& c, ControllerKind kind, bool write_files) {
  const Trace trace = load_trace_for(c);
  const PreparedData data = prepare_data(trace, c.train.tau, c.train_fraction);
  Checkpoints ck = load_checkpoints(c, kind == ControllerKind::cca);
  const Critic& critic = ck.critic;
  const NormalizationSpec& norm = critic.normalization();
  const CostParams& cost = critic.cost_params();
  const std::size_t na = critic.action_dim(), ns = critic.state_dim();
  if (trace.action_dim() != na || trace.state_dim() != ns)
    throw DataError("trace dimensions do not match the critic checkpoint");

  Eigen::Index n = data.val.rows();
  if (c.eval.horizon > 0) n = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(c.eval.horizon));
  const Eigen::MatrixXd xmu = data.val.xmu.leftCols(n);
  Eigen::MatrixXd actions(static_cast<Eigen::Index>(na), n);

  FixedController fixed;
  if (kind == ControllerKind::fixed) {
    fixed = c.fixed;
    if (fixed.rules.empty())
      throw ConfigError("trace_only mode needs explicit fixed_controller.rules");
    fixed.validate(ns, na);
  }
  if (kind == ControllerKind::cca) {
    actions = nn::forward(ck.policy.actor.net, xmu);
  } else {
    const Eigen::Index off = xmu.rows() - static_cast<Eigen::Index>(ns);
    for (Eigen::Index j = 0; j < n; ++j) {
      std::vector<double> a;
      if (kind == ControllerKind::ts) {
        DEConfig de = c.de;
        de.seed = step_seed(c.de.seed, static_cast<std::size_t>(j));
        a = ts_optimize(critic, xmu.col(j), c.bounds, de).action;
      } else {
        std::vector<double> zs(xmu.col(j).data() + off, xmu.col(j).data() + off + ns);
        a = fixed_policy(norm.denormalize(Role::state, zs), fixed, c.bounds);
      }
      const auto z = norm.normalize(Role::action, a);
      for (std::size_t i = 0; i < na; ++i) actions(static_cast<Eigen::Index>(i), j) = z[i];
    }
  }
  // Clip in physical units, as act() does.
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> z(actions.col(j).data(), actions.col(j).data() + na);
    const auto a = c.bounds.clip(norm.denormalize(Role::action, z));
    const auto zc = norm.normalize(Role::action, a);
    for (std::size_t i = 0; i < na; ++i) actions(static_cast<Eigen::Index>(i), j) = zc[i];
  }

  Eigen::MatrixXd xq(xmu.rows() + static_cast<Eigen::Index>(na), n);
  xq << xmu, actions;
  const Eigen::VectorXd pred_cost = critic.evaluate(xq);
  const Eigen::MatrixXd pred = critic.predict_readings(xq);
  const Eigen::MatrixXd rec_xq = data.val.xq.leftCols(n);
  const Eigen::VectorXd rec_cost = critic.true_cost(rec_xq, data.val.yr.leftCols(n));

  auto energy = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& yr, Eigen::Index j) {
    if (cost.fan_law) {
      const auto& f = *cost.fan_law;
      const Eigen::Index row = x.rows() - static_cast<Eigen::Index>(na) +
                               static_cast<Eigen::Index>(f.action_channel);
      const double flow = norm.denormalize(Role::action, f.action_channel, x(row, j));
      return fan_power(flow, f.rated_flow, f.rated_power);
    }
    return norm.denormalize(Role::reading, cost.energy_channel, yr(cost.energy_channel, j));
  };

  EvalResult r;
  r.steps = static_cast<std::size_t>(n);
  r.eval_begin = data.eval_begin;
  r.max_temps.assign(cost.temp_channels.size(), -std::numeric_limits<double>::infinity());
  std::vector<double> e(static_cast<std::size_t>(n)), ce(e), re(e);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = energy(xq, pred, j);
    re[j] = energy(rec_xq, data.val.yr, j);
    ce[j] = pred_cost(j);
    for (std::size_t k = 0; k < cost.temp_channels.size(); ++k) {
      const auto ch = cost.temp_channels[k];
      r.max_temps[k] = std::max(r.max_temps[k],
                                norm.denormalize(Role::reading, ch, pred(static_cast<Eigen::Index>(ch), j)));
    }
    if (write_files) {
      std::vector<double> row{data.val.t[static_cast<std::size_t>(j)]};
      for (std::size_t i = 0; i < na; ++i)
        row.push_back(norm.denormalize(Role::action, i, actions(static_cast<Eigen::Index>(i), j)));
      for (Eigen::Index i = 0; i < pred.rows(); ++i)
        row.push_back(norm.denormalize(Role::reading, static_cast<std::size_t>(i), pred(i, j)));
      row.insert(row.end(), {e[j], ce[j], re[j], rec_cost(j)});
      rows.push_back(std::move(row));
    }
  }
  r.mean_energy = mean_of(e);
  r.mean_cost = mean_of(ce);
  r.recorded_energy = mean_of(re);
  std::vector<double> rc(rec_cost.data(), rec_cost.data() + n);
  r.recorded_cost = mean_of(rc);

  if (write_files) {
    std::vector<std::string> header{"t"};
    for (const auto& nme : trace.action_names) header.push_back("a:" + nme);
    for (const auto& nme : trace.reading_names) header.push_back("pred:" + nme);
    header.insert(header.end(), {"energy", "cost", "recorded_energy", "recorded_cost"});
    write_steps_csv(c.output_dir / ("steps_" + std::string(to_string(kind)) + ".csv"), header,
                    rows);
  }
  return r;
}

std::string energy_name(const ExperimentConfig& c, const std::vector<std::string>& readings) {
  if (c.cost.fan_law) return "fan_power";
  return readings.at(c.cost.energy_channel);
}

std::vector<std::string> reading_names_for(const ExperimentConfig& c) {
  if (c.mode == Mode::two_zone_sim) return plant_reading_names();
  return load_trace_for(c).reading_names;
}

Json train_impl(const ExperimentConfig& c, const ProgressFn& progress) {
  c.validate();
  const Trace trace = load_trace_for(c);
  c.cost.validate(trace.reading_dim());
  if (c.bounds.size() != trace.action_dim())
    throw ConfigError("bounds has " + std::to_string(c.bounds.size()) + " channels, trace has " +
                      std::to_string(trace.action_dim()) + " actions");
  const PreparedData data = prepare_data(trace, c.train.tau, c.train_fraction);
  TrainConfig cfg = c.train;
  cfg.cost = c.cost;
  TrainObserver obs;
  if (progress)
    obs.on_epoch = [&](const EpochRecord& e) {
      if (e.epoch == 1 || e.epoch % 20 == 0 || e.epoch == cfg.max_epoch) {
        std::ostringstream os;
        os << "epoch " << e.epoch << "/" << cfg.max_epoch
           << " critic_loss=" << format_double(e.critic_train_loss)
           << " val=" << format_double(cfg.due ? e.critic_val_due : e.critic_val_mse)
           << " actor_val=" << format_double(e.actor_val);
        progress(os.str());
      }
    };
  TrainResult res = train(data.train, data.val, data.norm, cfg, obs);

  ensure_dir(c.output_dir);
  write_json_file(critic_file(c), critic_to_json(res.critic));
  PolicyCheckpoint p{res.actor, data.norm, c.bounds, cfg.tau, trace.state_names};
  write_json_file(actor_file(c), policy_to_json(p));
  Json report = to_json(res.report);
  report["seed"] = cfg.seed;
  report["tau"] = cfg.tau;
  report["train_rows"] = data.train.rows();
  report["val_rows"] = data.val.rows();
  report["xq_width"] = data.train.xq_width();
  report["xmu_width"] = data.train.xmu_width();
  report["reading_names"] = trace.reading_names;
  report["config"] = to_json(cfg);
  report["config"]["cost"] = to_json(cfg.cost);
  write_json_file(report_file(c), report);

  return Json{{"command", "train"},
              {"epochs", res.report.epochs.size()},
              {"validation", cfg.due ? "due" : "mse"},
              {"best_critic_epoch", res.report.best_critic_epoch},
              {"best_critic_error", res.report.best_critic_error},
              {"best_actor_epoch", res.report.best_actor_epoch},
              {"best_actor_error", res.report.best_actor_error},
              {"best_critic_mae", res.report.best_critic_mae},
              {"underestimation_fraction",
               Json{{"mse", res.report.mse_checkpoint.underestimation_fraction},
                    {"due", res.report.due_checkpoint.underestimation_fraction}}},
              {"xq_width", data.train.xq_width()},
              {"files",
               {critic_file(c).string(), actor_file(c).string(), report_file(c).string()}}};
}

EvalResult evaluate_impl(const ExperimentConfig& c, ControllerKind kind, bool write_files) {
  c.validate();
  if (write_files) ensure_dir(c.output_dir);
  return c.mode == Mode::two_zone_sim ? evaluate_sim(c, kind, write_files)
                                      : evaluate_trace_only(c, kind, write_files);
}

ExperimentConfig with_seed_offset(const ExperimentConfig& c, std::uint64_t i) {
  ExperimentConfig r = c;
  r.train.seed += i;
  r.de.seed += i;
  if (c.mode == Mode::two_zone_sim) {
    r.trace_gen.seed += i;
    r.scenario.seed += i;
  }
  return r;
}

}  // namespace

void ExperimentConfig::validate() const {
  bounds.validate();
  if (bounds.size() == 0) throw ConfigError("bounds must list at least one action channel");
  if (output_dir.empty()) throw ConfigError("paths.output_dir must not be empty");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("split.train_fraction must lie in (0, 1)");
  if (train.max_epoch < 1) throw ConfigError("train.max_epoch must be >= 1");
  if (train.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (train.tau < 1) throw ConfigError("train.tau must be >= 1");
  de.validate(bounds.size());
  if (trace_gen.smoothing_window < 1) throw ConfigError("trace_gen.smoothing_window must be >= 1");
  if (mode == Mode::two_zone_sim) {
    if (bounds.size() != kSetpoints)
      throw ConfigError("two_zone_sim needs " + std::to_string(kSetpoints) + " bounds channels");
    PlantModel m = plant;
    m.bounds = bounds;
    m.validate();
    cost.validate(plant_reading_names().size());
    if (scenario_path.empty() && scenario.length < 2)
      throw ConfigError("scenario.length must be >= 2");
    if (!scenario_path.empty() && !fs::exists(scenario_path))
      throw ConfigError("scenario file " + scenario_path.string() + " does not exist");
    if (!fixed.rules.empty()) fixed.validate(plant_state_names().size(), kSetpoints);
  } else {
    if (trace_path.empty()) throw ConfigError("trace_only mode needs paths.trace");
    if (!fs::exists(trace_path))
      throw ConfigError("trace file " + trace_path.string() + " does not exist");
    if (cost.fan_law && cost.fan_law->action_channel >= bounds.size())
      throw ConfigError("cost.fan_law.action_channel is out of range");
  }
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig c;
  c.bounds = c.plant.bounds;
  return c;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  check_keys(j,
             {"mode", "paths", "train", "cost", "bounds", "de", "plant", "scenario", "trace_gen",
              "split", "fixed_controller", "evaluate"},
             "config");
  ExperimentConfig c = default_experiment_config();
  if (j.contains("mode")) {
    std::string m;
    get_opt(j, "mode", m, "config");
    c.mode = mode_from_string(m);
  }
  if (j.contains("paths")) {
    const Json& p = j.at("paths");
    check_keys(p, {"output_dir", "trace", "scenario"}, "paths");
    std::string s;
    if (p.contains("output_dir")) get_opt(p, "output_dir", s, "paths"), c.output_dir = s;
    if (p.contains("trace")) get_opt(p, "trace", s, "paths"), c.trace_path = s;
    if (p.contains("scenario")) get_opt(p, "scenario", s, "paths"), c.scenario_path = s;
  }
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
  if (j.contains("cost")) c.cost = cost_params_from_json(j.at("cost"));
  if (j.contains("bounds")) c.bounds = bounds_from_json(j.at("bounds"));
  if (j.contains("de")) c.de = de_config_from_json(j.at("de"));
  if (j.contains("plant")) plant_from_json(j.at("plant"), c.plant);
  if (j.contains("scenario")) scenario_from_json(j.at("scenario"), c.scenario);
  if (j.contains("trace_gen")) {
    const Json& t = j.at("trace_gen");
    check_keys(t, {"smoothing_window", "seed"}, "trace_gen");
    get_opt(t, "smoothing_window", c.trace_gen.smoothing_window, "trace_gen");
    get_opt(t, "seed", c.trace_gen.seed, "trace_gen");
  }
  if (j.contains("split")) {
    check_keys(j.at("split"), {"train_fraction"}, "split");
    get_opt(j.at("split"), "train_fraction", c.train_fraction, "split");
  }
  if (j.contains("fixed_controller")) c.fixed = fixed_controller_from_json(j.at("fixed_controller"));
  if (j.contains("evaluate")) {
    check_keys(j.at("evaluate"), {"horizon"}, "evaluate");
    get_opt(j.at("evaluate"), "horizon", c.eval.horizon, "evaluate");
  }
  c.train.cost = c.cost;
  c.plant.bounds = c.bounds;
  return c;
}

Json to_json(const ExperimentConfig& c) {
  return Json{{"mode", mode_name(c.mode)},
              {"paths",
               {{"output_dir", c.output_dir.string()},
                {"trace", c.trace_path.string()},
                {"scenario", c.scenario_path.string()}}},
              {"train", to_json(c.train)},
              {"cost", to_json(c.cost)},
              {"bounds", to_json(c.bounds)},
              {"de", to_json(c.de)},
              {"plant", plant_to_json(c.plant)},
              {"scenario", scenario_to_json(c.scenario)},
              {"trace_gen",
               {{"smoothing_window", c.trace_gen.smoothing_window}, {"seed", c.trace_gen.seed}}},
              {"split", {{"train_fraction", c.train_fraction}}},
              {"fixed_controller", to_json(c.fixed)},
              {"evaluate", {{"horizon", c.eval.horizon}}}};
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file " + path.string() + " does not exist");
  Json j;
  try {
    j = read_json_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return experiment_config_from_json(j);
}

fs::path trace_file(const ExperimentConfig& c) {
  if (c.mode == Mode::trace_only) return c.trace_path;
  return c.output_dir / "trace.csv";
}
fs::path critic_file(const ExperimentConfig& c) { return c.output_dir / "critic.json"; }
fs::path actor_file(const ExperimentConfig& c) { return c.output_dir / "actor.json"; }
fs::path report_file(const ExperimentConfig& c) { return c.output_dir / "train_report.json"; }

std::string_view to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::cca: return "cca";
    case ControllerKind::ts: return "ts";
    case ControllerKind::fixed: return "fixed";
  }
  return "?";
}

ControllerKind controller_from_string(std::string_view s) {
  if (s == "cca") return ControllerKind::cca;
  if (s == "ts") return ControllerKind::ts;
  if (s == "fixed") return ControllerKind::fixed;
  throw ConfigError("unknown controller '" + std::string(s) + "' (expected cca, ts or fixed)");
}

SweepParam sweep_param_from_string(std::string_view s) {
  if (s == "lambda") return SweepParam::lambda;
  if (s == "tau") return SweepParam::tau;
  throw ConfigError("unknown sweep parameter '" + std::string(s) + "' (expected lambda or tau)");
}

PreparedData prepare_data(const Trace& trace, std::size_t tau, double train_fraction) {
  if (tau == 0) throw ConfigError("tau must be >= 1");
  if (trace.records.size() < tau + 2)
    throw DataError("trace has too few records for tau=" + std::to_string(tau));
  const std::size_t rows = trace.records.size() - tau;
  const std::size_t n_train = split_point(rows, train_fraction);
  if (n_train == 0 || n_train >= rows)
    throw ConfigError("split leaves an empty training or validation set");
  PreparedData d;
  const std::span<const TraceRecord> all(trace.records);
  d.norm = fit_normalization(all.first(n_train + tau));
  const auto normed = normalize(d.norm, all);
  auto [tr, va] = split(build_windows(normed, tau), train_fraction);
  d.train = std::move(tr);
  d.val = std::move(va);
  d.eval_begin = n_train + tau;
  return d;
}

Scenario build_scenario(const ExperimentConfig& c) {
  if (!c.scenario_path.empty()) {
    Scenario s = load_scenario_csv(c.scenario_path, c.plant.timestep_minutes);
    s.seed = c.scenario.seed;
    return s;
  }
  ScenarioSpec spec = c.scenario;
  spec.timestep_minutes = c.plant.timestep_minutes;
  return make_scenario(spec);
}

FixedController resolve_fixed_controller(const ExperimentConfig& c) {
  if (!c.fixed.rules.empty()) return c.fixed;
  PlantModel m = c.plant;
  m.bounds = c.bounds;
  return tune_fixed_controller(m, c.fixed.target_zone_temp);
}

Json cmd_generate_trace(const ExperimentConfig& c) {
  c.validate();
  if (c.mode != Mode::two_zone_sim)
    throw ConfigError("generate-trace needs mode two_zone_sim");
  const Scenario scen = build_scenario(c);
  PlantModel plant = c.plant;
  plant.bounds = c.bounds;
  const Trace trace = generate_random_trace(c.bounds, scen.size(), c.trace_gen.smoothing_window,
                                            c.trace_gen.seed, plant, scen);
  ensure_dir(c.output_dir);
  save_csv(trace, trace_file(c));

  Json stats = Json::object();
  auto add = [&](const std::string& name, auto get) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (const auto& r : trace.records) {
      const double v = get(r);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    stats[name] = Json{{"min", lo}, {"max", hi},
                       {"mean", sum / static_cast<double>(trace.records.size())}};
  };
  for (std::size_t i = 0; i < trace.state_dim(); ++i)
    add(trace.state_names[i], [i](const TraceRecord& r) { return r.state[i]; });
  for (std::size_t i = 0; i < trace.action_dim(); ++i)
    add(trace.action_names[i], [i](const TraceRecord& r) { return r.action[i]; });
  for (std::size_t i = 0; i < trace.reading_dim(); ++i)
    add(trace.reading_names[i], [i](const TraceRecord& r) { return r.readings[i]; });
  return Json{{"command", "generate-trace"},
              {"rows", trace.records.size()},
              {"file", trace_file(c).string()},
              {"channels", stats}};
}

Json cmd_train(const ExperimentConfig& c, const ProgressFn& progress) {
  return train_impl(c, progress);
}

Json cmd_evaluate(const ExperimentConfig& c, ControllerKind kind) {
  const EvalResult r = evaluate_impl(c, kind, true);
  const auto readings = reading_names_for(c);
  Json j = eval_to_json(r, kind, c.mode, temp_names(c.cost, readings), energy_name(c, readings));
  const fs::path out = c.output_dir / ("metrics_" + std::string(to_string(kind)) + ".json");
  write_json_file(out, j);
  j["files"] = {out.string(),
                (c.output_dir / ("steps_" + std::string(to_string(kind)) + ".csv")).string()};
  return j;
}

Json cmd_compare(const ExperimentConfig& c, std::size_t runs, const ProgressFn& progress) {
  c.validate();
  if (runs == 0) throw ConfigError("compare needs at least one run");
  const auto readings = reading_names_for(c);
  const auto tnames = temp_names(c.cost, readings);
  const std::vector<ControllerKind> kinds{ControllerKind::cca, ControllerKind::ts,
                                          ControllerKind::fixed};
  // metric columns: energy, max temps..., cost
  std::vector<std::string> cols{"mean_energy"};
  for (const auto& t : tnames) cols.push_back("max_" + t);
  cols.push_back("mean_cost");
  std::vector<std::vector<std::vector<double>>> vals(
      kinds.size(), std::vector<std::vector<double>>(cols.size()));
  Json run_list = Json::array();

  for (std::size_t i = 0; i < runs; ++i) {
    ExperimentConfig rc = with_seed_offset(c, i);
    rc.output_dir = c.output_dir / "compare" / ("run_" + std::to_string(i));
    if (progress) progress("run " + std::to_string(i + 1) + "/" + std::to_string(runs));
    if (rc.mode == Mode::two_zone_sim) cmd_generate_trace(rc);
    train_impl(rc, {});
    Json run{{"run", i}, {"train_seed", rc.train.seed}};
    const bool fixed_ok = rc.mode == Mode::two_zone_sim || !rc.fixed.rules.empty();
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      if (kinds[k] == ControllerKind::fixed && !fixed_ok) continue;
      const EvalResult r = evaluate_impl(rc, kinds[k], true);
      write_json_file(rc.output_dir / ("metrics_" + std::string(to_string(kinds[k])) + ".json"),
                      eval_to_json(r, kinds[k], rc.mode, tnames, energy_name(rc, readings)));
      std::vector<double> row{r.mean_energy};
      row.insert(row.end(), r.max_temps.begin(), r.max_temps.end());
      row.push_back(r.mean_cost);
      for (std::size_t m = 0; m < cols.size(); ++m) vals[k][m].push_back(row[m]);
      run[std::string(to_string(kinds[k]))] = row;
    }
    run_list.push_back(run);
  }

  Json table = Json::array();
  std::vector<std::string> header{"controller", "runs"};
  for (const auto& col : cols) {
    header.push_back(col + "_mean");
    header.push_back(col + "_std");
  }
  std::ostringstream csv;
  for (std::size_t i = 0; i < header.size(); ++i) csv << (i ? "," : "") << header[i];
  csv << '\n';
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    if (vals[k][0].empty()) continue;
    Json entry{{"controller", std::string(to_string(kinds[k]))}, {"runs", vals[k][0].size()}};
    Json mean = Json::object(), sd = Json::object();
    csv << to_string(kinds[k]) << ',' << vals[k][0].size();
    for (std::size_t m = 0; m < cols.size(); ++m) {
      mean[cols[m]] = mean_of(vals[k][m]);
      sd[cols[m]] = std_of(vals[k][m]);
      csv << ',' << format_double(mean_of(vals[k][m])) << ','
          << format_double(std_of(vals[k][m]));
    }
    csv << '\n';
    entry["mean"] = mean;
    entry["std"] = sd;
    table.push_back(entry);
  }
  Json out{{"command", "compare"},
           {"runs", runs},
           {"energy_name", energy_name(c, readings)},
           {"columns", cols},
           {"table", table},
           {"per_run", run_list}};
  ensure_dir(c.output_dir);
  write_json_file(c.output_dir / "compare.json", out);
  {
    std::ofstream f(c.output_dir / "compare.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + (c.output_dir / "compare.csv").string());
    f << csv.str();
  }
  out["files"] = {(c.output_dir / "compare.json").string(), (c.output_dir / "compare.csv").string()};
  return out;
}

Json cmd_sweep(const ExperimentConfig& c, SweepParam param, const std::vector<double>& values,
               const ProgressFn& progress) {
  c.validate();
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const std::string pname = param == SweepParam::lambda ? "lambda" : "tau";
  for (double v : values) {
    if (param == SweepParam::lambda && !(v >= 0.0))
      throw ConfigError("lambda values must be >= 0");
    if (param == SweepParam::tau && !(v >= 1.0 && v == std::floor(v)))
      throw ConfigError("tau values must be integers >= 1");
  }
  const auto readings = reading_names_for(c);
  const auto tnames = temp_names(c.cost, readings);

  // Baseline for the saving column: the fixed controller in simulation, the
  // recorded behavior otherwise.
  std::optional<double> base_energy;
  std::string base_error;
  if (c.mode == Mode::two_zone_sim) {
    if (!fs::exists(trace_file(c))) {
      if (progress) progress("generating trace");
      cmd_generate_trace(c);
    }
    try {
      base_energy = evaluate_impl(c, ControllerKind::fixed, false).mean_energy;
    } catch (const std::exception& e) {
      base_error = e.what();
    }
  }

  std::vector<std::string> header{"value", "seed", "status", "mean_energy"};
  for (const auto& t : tnames) header.push_back("max_" + t);
  header.insert(header.end(), {"mean_cost", "energy_saving_pct"});
  for (const auto& r : readings) header.push_back("mae_" + r);
  header.push_back("error");

  std::ostringstream csv;
  for (std::size_t i = 0; i < header.size(); ++i) csv << (i ? "," : "") << header[i];
  csv << '\n';
  Json rows = Json::array();
  std::size_t failures = 0;
  const fs::path dir = c.output_dir / ("sweep_" + pname);

  for (std::size_t i = 0; i < values.size(); ++i) {
    // Every value shares the config seed so rows differ only in the swept parameter.
    ExperimentConfig rc = c;
    rc.output_dir = dir / ("value_" + std::to_string(i));
    if (param == SweepParam::lambda) {
      rc.cost.lambda = values[i];
    } else {
      rc.train.tau = static_cast<std::size_t>(values[i]);
    }
    rc.train.cost = rc.cost;
    if (progress) progress(pname + "=" + format_double(values[i]));
    Json row{{"value", values[i]}, {"seed", rc.train.seed}};
    csv << format_double(values[i]) << ',' << rc.train.seed << ',';
    try {
      // The shared trace stays where the parent config keeps it.
      ensure_dir(rc.output_dir);
      if (c.mode == Mode::two_zone_sim) {
        std::error_code ec;
        fs::copy_file(trace_file(c), trace_file(rc), fs::copy_options::overwrite_existing, ec);
        if (ec) throw IoError("cannot stage trace for the sweep: " + ec.message());
      }
      const Json tr = train_impl(rc, {});
      const EvalResult r = evaluate_impl(rc, ControllerKind::cca, true);
      write_json_file(rc.output_dir / "metrics_cca.json",
                      eval_to_json(r, ControllerKind::cca, rc.mode, tnames, energy_name(rc, readings)));
      std::optional<double> ref = base_energy ? base_energy : r.recorded_energy;
      const double saving =
          ref ? 100.0 * (*ref - r.mean_energy) / *ref : std::numeric_limits<double>::quiet_NaN();
      row["status"] = "ok";
      row["mean_energy"] = r.mean_energy;
      row["max_temps"] = r.max_temps;
      row["mean_cost"] = r.mean_cost;
      row["energy_saving_pct"] = ref ? Json(saving) : Json(nullptr);
      row["mae"] = tr.at("best_critic_mae");
      csv << "ok," << format_double(r.mean_energy);
      for (double t : r.max_temps) csv << ',' << format_double(t);
      csv << ',' << format_double(r.mean_cost) << ',' << (ref ? format_double(saving) : "");
      for (const auto& m : tr.at("best_critic_mae")) csv << ',' << format_double(m.get<double>());
      csv << ",\n";
    } catch (const std::exception& e) {
      ++failures;
      row["status"] = "error";
      row["error"] = e.what();
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      csv << "error";
      for (std::size_t k = 0; k < tnames.size() + readings.size() + 3; ++k) csv << ',';
      csv << ',' << msg << '\n';
    }
    rows.push_back(row);
  }

  ensure_dir(c.output_dir);
  const fs::path out = c.output_dir / ("sweep_" + pname + ".csv");
  {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + out.string());
    f << csv.str();
  }
  Json j{{"command", "sweep"},
         {"parameter", pname},
         {"energy_name", energy_name(c, readings)},
         {"temp_names", tnames},
         {"rows", rows},
         {"failures", failures},
         {"file", out.string()}};
  if (base_energy) j["baseline_energy"] = *base_energy;
  if (!base_error.empty()) j["baseline_error"] = base_error;
  return j;
}

}  // namespace dccool
