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

// Offline trace data model: CSV ingestion, normalization into (-1, 1),
// sliding-window sample construction and chronological splitting.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dccool {

struct PlantModel;
struct Scenario;

// One time slot. readings[t] were produced by action[t-1]: the action chosen
// at slot t takes effect during the following slot.
struct TraceRecord {
  double t = 0.0;
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> readings;
};

struct Trace {
  std::vector<std::string> state_names;
  std::vector<std::string> action_names;
  std::vector<std::string> reading_names;
  std::vector<TraceRecord> records;

  std::size_t state_dim() const { return state_names.size(); }
  std::size_t action_dim() const { return action_names.size(); }
  std::size_t reading_dim() const { return reading_names.size(); }
};

// Header: t,s:<name>...,a:<name>...,r:<name>... (role columns in any order).
// Throws DataError naming the offending row for malformed input.
Trace read_csv(std::istream& in, const std::string& source = "<stream>");
Trace load_csv(const std::filesystem::path& path);
void write_csv(const Trace& trace, std::ostream& out);
void save_csv(const Trace& trace, const std::filesystem::path& path);

enum class Role { state, action, reading };

struct ChannelRange {
  double min = 0.0;
  double max = 1.0;

  friend bool operator==(const ChannelRange&, const ChannelRange&) = default;
};

// Affine per-channel map sending the observed min to -1 + margin and the
// observed max to 1 - margin.
struct NormalizationSpec {
  double margin = 0.05;
  std::vector<ChannelRange> state;
  std::vector<ChannelRange> action;
  std::vector<ChannelRange> readings;

  const std::vector<ChannelRange>& channels(Role role) const;
  double normalize(Role role, std::size_t channel, double x) const;
  double denormalize(Role role, std::size_t channel, double z) const;
  // d physical / d normalized for one channel.
  double scale(Role role, std::size_t channel) const;
  std::vector<double> normalize(Role role, std::span<const double> x) const;
  std::vector<double> denormalize(Role role, std::span<const double> z) const;

  friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

// Throws DataError for fewer than two records or a constant channel.
NormalizationSpec fit_normalization(std::span<const TraceRecord> records,
                                    double margin = 0.05);
std::vector<TraceRecord> normalize(const NormalizationSpec& spec,
                                   std::span<const TraceRecord> records);
std::vector<double> denormalize(const NormalizationSpec& spec,
                                std::span<const double> z, Role role);

struct ActionBound {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
};

struct ActionBounds {
  std::vector<ActionBound> channels;

  std::size_t size() const { return channels.size(); }
  // Throws ConfigError naming the first channel with lower >= upper.
  void validate() const;
  bool contains(std::span<const double> action) const;
  std::vector<double> clip(std::span<const double> action) const;
  std::vector<double> midpoint() const;
};

// Samples stored one per column, in the order of the source trace.
//   xq  : tau*(|s|+|a|) rows, [s_{t-tau+1}, a_{t-tau+1}, ..., s_t, a_t]
//   xmu : xq without the trailing a_t block
//   yr  : |r| rows, readings of slot t+1
struct WindowedDataset {
  std::size_t tau = 1;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  Eigen::MatrixXd xq;
  Eigen::MatrixXd xmu;
  Eigen::MatrixXd yr;
  std::vector<double> t;  // time of the yr slot

  Eigen::Index rows() const { return xq.cols(); }
  Eigen::Index xq_width() const { return xq.rows(); }
  Eigen::Index xmu_width() const { return xmu.rows(); }
  WindowedDataset slice(Eigen::Index begin, Eigen::Index end) const;
};

// Throws ConfigError for tau == 0 and DataError if fewer than tau+1 records.
WindowedDataset build_windows(std::span<const TraceRecord> records, std::size_t tau);

// Number of leading items that go to the training side.
std::size_t split_point(std::size_t n, double train_fraction);
// Chronological; throws ConfigError if either side would be empty.
std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset& data,
                                                  double train_fraction);

// Centered moving average; windows are truncated at the ends.
std::vector<double> centered_moving_average(std::span<const double> x, std::size_t window);

// Random behavior policy: uniform draws in [L, U] per channel, smoothed with
// a centered moving average and clipped, then played through the plant over
// the scenario.
Trace generate_random_trace(const ActionBounds& bounds, std::size_t length,
                            std::size_t smoothing_window, std::uint64_t seed,
                            const PlantModel& plant, const Scenario& scenario);

}  // namespace dccool
