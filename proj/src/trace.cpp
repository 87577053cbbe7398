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

#include "dccool/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "dccool/error.hpp"
#include "dccool/format.hpp"
#include "dccool/simulator.hpp"

namespace dccool {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Trace read_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  // Skip leading blank lines and a UTF-8 byte order mark.
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw DataError(source + ": empty file");

  Trace trace;
  enum class Col { state, action, reading };
  std::vector<Col> layout;
  std::vector<std::string> header;
  for (auto cell : split_commas(line)) header.emplace_back(cell);
  if (header.empty() || header[0] != "t")
    throw DataError(source + ": header must start with a 't' column");
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string_view h = header[c];
    if (h.size() > 2 && h.substr(0, 2) == "s:") {
      layout.push_back(Col::state);
      trace.state_names.emplace_back(h.substr(2));
    } else if (h.size() > 2 && h.substr(0, 2) == "a:") {
      layout.push_back(Col::action);
      trace.action_names.emplace_back(h.substr(2));
    } else if (h.size() > 2 && h.substr(0, 2) == "r:") {
      layout.push_back(Col::reading);
      trace.reading_names.emplace_back(h.substr(2));
    } else {
      throw DataError(source + ": header column " + std::to_string(c + 1) + " '" +
                      std::string(h) + "' lacks a role prefix (s:, a: or r:)");
    }
  }
  if (trace.state_names.empty() || trace.action_names.empty() || trace.reading_names.empty())
    throw DataError(source + ": header needs at least one s:, a: and r: column");

  std::size_t row = 0;
  double prev_t = 0.0, step = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++row;
    const std::string where = source + ": row " + std::to_string(row) + " (line " +
                              std::to_string(lineno) + ")";
    const auto cells = split_commas(line);
    if (cells.size() != header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    TraceRecord rec;
    if (!parse_number(cells[0], rec.t))
      throw DataError(where + ": non-numeric time '" + std::string(cells[0]) + "'");
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_number(cells[c], v))
        throw DataError(where + ", column '" + std::string(header[c]) +
                        "': non-numeric cell '" + std::string(cells[c]) + "'");
      switch (layout[c - 1]) {
        case Col::state: rec.state.push_back(v); break;
        case Col::action: rec.action.push_back(v); break;
        case Col::reading: rec.readings.push_back(v); break;
      }
    }
    if (row >= 2) {
      const double dt = rec.t - prev_t;
      if (!(dt > 0.0))
        throw DataError(where + ": time " + format_double(rec.t) +
                        " does not increase (previous " + format_double(prev_t) + ")");
      if (row == 2) {
        step = dt;
      } else if (std::abs(dt - step) > 1e-9 * std::max(1.0, std::abs(step))) {
        throw DataError(where + ": nonuniform timestep " + format_double(dt) + " (expected " +
                        format_double(step) + ")");
      }
    }
    prev_t = rec.t;
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

Trace load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file " + path.string());
  return read_csv(in, path.string());
}

void write_csv(const Trace& trace, std::ostream& out) {
  out << 't';
  for (const auto& n : trace.state_names) out << ",s:" << n;
  for (const auto& n : trace.action_names) out << ",a:" << n;
  for (const auto& n : trace.reading_names) out << ",r:" << n;
  out << '\n';
  for (const auto& r : trace.records) {
    out << format_double(r.t);
    for (double v : r.state) out << ',' << format_double(v);
    for (double v : r.action) out << ',' << format_double(v);
    for (double v : r.readings) out << ',' << format_double(v);
    out << '\n';
  }
}

void save_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write trace file " + path.string());
  write_csv(trace, out);
  if (!out) throw IoError("error while writing " + path.string());
}

const std::vector<ChannelRange>& NormalizationSpec::channels(Role role) const {
  switch (role) {
    case Role::state: return state;
    case Role::action: return action;
    case Role::reading: return readings;
  }
  return state;
}

double NormalizationSpec::normalize(Role role, std::size_t channel, double x) const {
  const ChannelRange& r = channels(role).at(channel);
  return -(1.0 - margin) + 2.0 * (1.0 - margin) * (x - r.min) / (r.max - r.min);
}

double NormalizationSpec::denormalize(Role role, std::size_t channel, double z) const {
  const ChannelRange& r = channels(role).at(channel);
  return r.min + (z + (1.0 - margin)) * (r.max - r.min) / (2.0 * (1.0 - margin));
}

double NormalizationSpec::scale(Role role, std::size_t channel) const {
  const ChannelRange& r = channels(role).at(channel);
  return (r.max - r.min) / (2.0 * (1.0 - margin));
}

std::vector<double> NormalizationSpec::normalize(Role role, std::span<const double> x) const {
  if (x.size() != channels(role).size())
    throw DimensionError("normalize: expected " + std::to_string(channels(role).size()) +
                         " channels, got " + std::to_string(x.size()));
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = normalize(role, i, x[i]);
  return z;
}

std::vector<double> NormalizationSpec::denormalize(Role role, std::span<const double> z) const {
  if (z.size() != channels(role).size())
    throw DimensionError("denormalize: expected " + std::to_string(channels(role).size()) +
                         " channels, got " + std::to_string(z.size()));
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = denormalize(role, i, z[i]);
  return x;
}

NormalizationSpec fit_normalization(std::span<const TraceRecord> records, double margin) {
  if (!(margin >= 0.0 && margin < 1.0)) throw ConfigError("normalization margin must lie in [0, 1)");
  if (records.size() < 2) throw DataError("normalization needs at least two records");
  NormalizationSpec spec;
  spec.margin = margin;
  auto fit = [&](auto member, const char* role) {
    const std::size_t dim = (records.front().*member).size();
    std::vector<ChannelRange> out(dim, ChannelRange{std::numeric_limits<double>::infinity(),
                                                    -std::numeric_limits<double>::infinity()});
    for (const auto& r : records) {
      const auto& v = r.*member;
      if (v.size() != dim) throw DimensionError("records have inconsistent dimensions");
      for (std::size_t i = 0; i < dim; ++i) {
        out[i].min = std::min(out[i].min, v[i]);
        out[i].max = std::max(out[i].max, v[i]);
      }
    }
    for (std::size_t i = 0; i < dim; ++i)
      if (!(out[i].min < out[i].max))
        throw DataError(std::string("cannot normalize constant ") + role + " channel " +
                        std::to_string(i));
    return out;
  };
  spec.state = fit(&TraceRecord::state, "state");
  spec.action = fit(&TraceRecord::action, "action");
  spec.readings = fit(&TraceRecord::readings, "reading");
  return spec;
}

std::vector<TraceRecord> normalize(const NormalizationSpec& spec,
                                   std::span<const TraceRecord> records) {
  std::vector<TraceRecord> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back({r.t, spec.normalize(Role::state, r.state),
                   spec.normalize(Role::action, r.action),
                   spec.normalize(Role::reading, r.readings)});
  return out;
}

std::vector<double> denormalize(const NormalizationSpec& spec, std::span<const double> z,
                                Role role) {
  return spec.denormalize(role, z);
}

void ActionBounds::validate() const {
  if (channels.empty()) throw ConfigError("action bounds are empty");
  for (const auto& c : channels) {
    if (!std::isfinite(c.lower) || !std::isfinite(c.upper) || !(c.lower < c.upper))
      throw ConfigError("bounds for action channel '" + c.name + "' are invalid: lower " +
                        format_double(c.lower) + " must be below upper " +
                        format_double(c.upper));
  }
}

bool ActionBounds::contains(std::span<const double> action) const {
  if (action.size() != channels.size()) return false;
  for (std::size_t i = 0; i < action.size(); ++i)
    if (!(action[i] >= channels[i].lower && action[i] <= channels[i].upper)) return false;
  return true;
}

std::vector<double> ActionBounds::clip(std::span<const double> action) const {
  if (action.size() != channels.size())
    throw DimensionError("clip: expected " + std::to_string(channels.size()) + " channels, got " +
                         std::to_string(action.size()));
  std::vector<double> out(action.size());
  for (std::size_t i = 0; i < action.size(); ++i)
    out[i] = std::clamp(action[i], channels[i].lower, channels[i].upper);
  return out;
}

std::vector<double> ActionBounds::midpoint() const {
  std::vector<double> m;
  for (const auto& c : channels) m.push_back(0.5 * (c.lower + c.upper));
  return m;
}

WindowedDataset WindowedDataset::slice(Eigen::Index begin, Eigen::Index end) const {
  WindowedDataset d;
  d.tau = tau;
  d.state_dim = state_dim;
  d.action_dim = action_dim;
  const Eigen::Index n = end - begin;
  d.xq = xq.middleCols(begin, n);
  d.xmu = xmu.middleCols(begin, n);
  d.yr = yr.middleCols(begin, n);
  d.t.assign(t.begin() + begin, t.begin() + end);
  return d;
}

WindowedDataset build_windows(std::span<const TraceRecord> records, std::size_t tau) {
  if (tau == 0) throw ConfigError("window length tau must be >= 1");
  if (records.size() < tau + 1)
    throw DataError("trace of " + std::to_string(records.size()) +
                    " records is too short for tau = " + std::to_string(tau) + " (needs " +
                    std::to_string(tau + 1) + ")");
  const std::size_t ns = records.front().state.size();
  const std::size_t na = records.front().action.size();
  const std::size_t nr = records.front().readings.size();
  for (const auto& r : records)
    if (r.state.size() != ns || r.action.size() != na || r.readings.size() != nr)
      throw DimensionError("records have inconsistent dimensions");

  const auto n = static_cast<Eigen::Index>(records.size() - tau);
  const auto block = static_cast<Eigen::Index>(ns + na);
  WindowedDataset d;
  d.tau = tau;
  d.state_dim = ns;
  d.action_dim = na;
  d.xq.resize(static_cast<Eigen::Index>(tau) * block, n);
  d.xmu.resize(static_cast<Eigen::Index>(tau) * block - static_cast<Eigen::Index>(na), n);
  d.yr.resize(static_cast<Eigen::Index>(nr), n);
  d.t.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index row = 0;
    for (std::size_t j = 0; j < tau; ++j) {
      const TraceRecord& r = records[static_cast<std::size_t>(k) + j];
      for (double v : r.state) d.xq(row++, k) = v;
      for (double v : r.action) d.xq(row++, k) = v;
    }
    d.xmu.col(k) = d.xq.col(k).head(d.xmu.rows());
    const TraceRecord& next = records[static_cast<std::size_t>(k) + tau];
    for (std::size_t i = 0; i < nr; ++i) d.yr(static_cast<Eigen::Index>(i), k) = next.readings[i];
    d.t[static_cast<std::size_t>(k)] = next.t;
  }
  return d;
}

std::size_t split_point(std::size_t n, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
}

std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset& data,
                                                  double train_fraction) {
  const std::size_t n = static_cast<std::size_t>(data.rows());
  const std::size_t k = split_point(n, train_fraction);
  if (k == 0 || k >= n)
    throw ConfigError("split of " + std::to_string(n) + " rows at fraction " +
                      format_double(train_fraction) + " leaves one side empty");
  return {data.slice(0, static_cast<Eigen::Index>(k)),
          data.slice(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n))};
}

std::vector<double> centered_moving_average(std::span<const double> x, std::size_t window) {
  if (window == 0) throw ConfigError("smoothing window must be >= 1");
  const std::size_t n = x.size();
  const std::size_t before = (window - 1) / 2;
  const std::size_t after = window / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(n - 1, i + after);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += x[j];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

Trace generate_random_trace(const ActionBounds& bounds, std::size_t length,
                            std::size_t smoothing_window, std::uint64_t seed,
                            const PlantModel& plant, const Scenario& scenario) {
  bounds.validate();
  if (smoothing_window == 0) throw ConfigError("smoothing window must be >= 1");
  if (!(length > smoothing_window))
    throw ConfigError("trace length must exceed the smoothing window");
  if (scenario.size() < length)
    throw ConfigError("scenario has " + std::to_string(scenario.size()) +
                      " steps, trace needs " + std::to_string(length));
  if (bounds.size() != plant.bounds.size())
    throw ConfigError("trace bounds and plant bounds differ in dimension");

  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> actions(length, std::vector<double>(bounds.size()));
  for (std::size_t t = 0; t < length; ++t)
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      std::uniform_real_distribution<double> u(bounds.channels[i].lower, bounds.channels[i].upper);
      actions[t][i] = u(rng);
    }
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    std::vector<double> col(length);
    for (std::size_t t = 0; t < length; ++t) col[t] = actions[t][i];
    col = centered_moving_average(col, smoothing_window);
    for (std::size_t t = 0; t < length; ++t)
      actions[t][i] = std::clamp(col[t], bounds.channels[i].lower, bounds.channels[i].upper);
  }

  Scenario s = scenario;
  s.ambient.resize(length);
  s.load.resize(length);
  PlantModel m = plant;
  m.bounds = bounds;
  RolloutOptions opts;
  opts.initial_action = actions.front();
  Controller replay = [&](const ControllerInput& in) { return actions[in.step]; };
  Simulation sim = simulate(m, s, replay, opts);
  for (std::size_t i = 0; i < bounds.size(); ++i)
    sim.trace.action_names[i] = bounds.channels[i].name;
  return std::move(sim.trace);
}

}  // namespace dccool
