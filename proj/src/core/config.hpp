// Copyright 2026 The gparareal Authors
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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "integrators.hpp"
#include "ode_system.hpp"

namespace gparareal {

enum class Mode { fine, parareal, gparareal };

const char* to_string(Mode mode);
Mode parse_mode(std::string_view text);

/// Initial-value grid for heatmap sweeps: per-dimension min, max and count.
struct GridSpec {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<int> count;

  bool operator==(const GridSpec&) const = default;
};

/// Every knob of one experiment. Built from defaults for the chosen system,
/// then overridden key by key (config file first, command-line flags last).
struct ExperimentConfig {
  std::string system = "fhn";
  std::vector<double> params;
  State u0;
  double t0 = 0.0;
  double t_end = 1.0;
  int slices = 1;
  std::int64_t nf = 1;
  std::int64_t ng = 1;
  int fine_order = 4;
  int coarse_order = 2;
  double tol = 1e-6;
  std::size_t workers = 1;
  Mode mode = Mode::gparareal;
  std::string legacy_in;
  std::string legacy_out;
  std::string out_dir = ".";
  GridSpec grid;

  bool operator==(const ExperimentConfig&) const = default;

  /// Desk-scale defaults: the benchmark setups with the fine step count
  /// reduced by 10^3 (FHN: N_F = 1.6e5; Roessler: N_F = 4.5e5).
  static ExperimentConfig defaults(const std::string& system);

  SolverSpec fine() const { return {fine_order, nf, SolverRole::fine}; }
  SolverSpec coarse() const { return {coarse_order, ng, SolverRole::coarse}; }
  TimeMesh mesh() const { return {t0, t_end, slices}; }
  OdeSystem build_system() const;
  OdeSystem build_system(const State& initial) const;
};

/// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& config);

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0; // 0 when the entry did not come from a file
};

/// Normalizes a key: trims, lowercases, maps '-' to '_', and accepts the
/// command-line spelling "tmax" for t_end.
std::string canonical_key(std::string_view key);

bool is_known_key(std::string_view key);

/// Parses "key = value" lines; '#' starts a comment. Does not validate values.
std::vector<ConfigEntry> parse_entries(std::string_view text);

/// Applies entries in order on top of the defaults of the selected system
/// (the last "system" entry wins), then validates.
ExperimentConfig resolve(const std::vector<ConfigEntry>& entries);

ExperimentConfig parse_config(std::string_view text);

/// Renders every field; parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig& config);

std::string format_double(double value);
std::vector<double> parse_doubles(std::string_view text, const std::string& field, int line);

} // namespace gparareal
