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

#include "config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "errors.hpp"
#include "runtime.hpp"

namespace gparareal {

namespace {

constexpr std::array<std::string_view, 19> kKeys = {
    "system",       "params",     "u0",       "t0",         "t_end",
    "slices",       "nf",         "ng",       "fine_order", "coarse_order",
    "tol",          "workers",    "mode",     "legacy_in",  "legacy_out",
    "out_dir",      "grid_min",   "grid_max", "grid_count"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view text, const std::string& field, int line) {
  const std::string s(trim(text));
  if (s.empty())
    throw ConfigError(field, "expected a number", line);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v))
    throw ConfigError(field, "'" + s + "' is not a finite number", line);
  return v;
}

std::int64_t parse_integer(std::string_view text, const std::string& field, int line) {
  // Accepts scientific notation for step counts ("1.6e5") as long as the value
  // is integral.
  const double v = parse_double(text, field, line);
  if (v != std::floor(v) || std::abs(v) > 9.0e15)
    throw ConfigError(field, "expected an integer", line);
  return static_cast<std::int64_t>(v);
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i)
      out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::string join(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i)
      out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

void apply(ExperimentConfig& c, const ConfigEntry& e) {
  const std::string& k = e.key;
  const int line = e.line;
  if (k == "system") {
    // handled by resolve()
  } else if (k == "params") {
    c.params = parse_doubles(e.value, k, line);
  } else if (k == "u0") {
    c.u0 = parse_doubles(e.value, k, line);
  } else if (k == "t0") {
    c.t0 = parse_double(e.value, k, line);
  } else if (k == "t_end") {
    c.t_end = parse_double(e.value, k, line);
  } else if (k == "slices") {
    const auto v = parse_integer(e.value, k, line);
    if (v <= 0 || v > 1'000'000)
      throw ConfigError(k, "slice count must be a positive integer", line);
    c.slices = static_cast<int>(v);
  } else if (k == "nf") {
    c.nf = parse_integer(e.value, k, line);
  } else if (k == "ng") {
    c.ng = parse_integer(e.value, k, line);
  } else if (k == "fine_order") {
    c.fine_order = static_cast<int>(parse_integer(e.value, k, line));
  } else if (k == "coarse_order") {
    c.coarse_order = static_cast<int>(parse_integer(e.value, k, line));
  } else if (k == "tol") {
    c.tol = parse_double(e.value, k, line);
  } else if (k == "workers") {
    const auto v = parse_integer(e.value, k, line);
    if (v <= 0)
      throw ConfigError(k, "worker count must be positive", line);
    c.workers = static_cast<std::size_t>(v);
  } else if (k == "mode") {
    try {
      c.mode = parse_mode(trim(e.value));
    } catch (const Error& err) {
      throw ConfigError(k, err.what(), line);
    }
  } else if (k == "legacy_in") {
    c.legacy_in = std::string(trim(e.value));
  } else if (k == "legacy_out") {
    c.legacy_out = std::string(trim(e.value));
  } else if (k == "out_dir") {
    c.out_dir = std::string(trim(e.value));
  } else if (k == "grid_min") {
    c.grid.min = parse_doubles(e.value, k, line);
  } else if (k == "grid_max") {
    c.grid.max = parse_doubles(e.value, k, line);
  } else if (k == "grid_count") {
    c.grid.count.clear();
    for (double v : parse_doubles(e.value, k, line)) {
      if (v != std::floor(v))
        throw ConfigError(k, "grid counts must be integers", line);
      c.grid.count.push_back(static_cast<int>(v));
    }
  } else {
    throw ConfigError(k, "unknown key", line);
  }
}

} // namespace

const char* to_string(Mode mode) {
  switch (mode) {
  case Mode::fine:
    return "fine";
  case Mode::parareal:
    return "parareal";
  case Mode::gparareal:
    return "gparareal";
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  if (text == "fine")
    return Mode::fine;
  if (text == "parareal")
    return Mode::parareal;
  if (text == "gparareal")
    return Mode::gparareal;
  throw Error("mode must be one of fine, parareal, gparareal (got '" + std::string(text) +
              "')");
}

ExperimentConfig ExperimentConfig::defaults(const std::string& system) {
  ExperimentConfig c;
  c.system = system;
  c.workers = default_workers();
  c.tol = 1e-6;
  c.mode = Mode::gparareal;
  if (system == "fhn") {
    c.params = {0.2, 0.2, 3.0};
    c.u0 = {-1.0, 1.0};
    c.t0 = 0.0;
    c.t_end = 40.0;
    c.slices = 40;
    c.nf = 160'000;
    c.ng = 160;
    c.fine_order = 4;
    c.coarse_order = 2;
    c.grid = {{-1.25, -1.25}, {1.25, 1.25}, {11, 11}};
  } else if (system == "rossler") {
    c.params = {0.2, 0.2, 5.7};
    c.u0 = {0.0, -6.78, 0.02};
    c.t0 = 0.0;
    c.t_end = 340.0;
    c.slices = 40;
    c.nf = 450'000;
    c.ng = 90'000;
    c.fine_order = 4;
    c.coarse_order = 1;
  } else {
    throw ConfigError("system", "unknown system '" + system + "' (expected fhn or rossler)");
  }
  return c;
}

OdeSystem ExperimentConfig::build_system() const { return build_system(u0); }

OdeSystem ExperimentConfig::build_system(const State& initial) const {
  return make_system(system, params, initial, t0, t_end);
}

void validate(const ExperimentConfig& c) {
  if (c.system != "fhn" && c.system != "rossler")
    throw ConfigError("system", "unknown system '" + c.system + "'");
  const std::size_t dim = c.system == "fhn" ? 2 : 3;
  if (c.params.size() != 3)
    throw ConfigError("params", "expected 3 comma-separated values");
  if (c.system == "fhn" && c.params[2] == 0.0)
    throw ConfigError("params", "FitzHugh-Nagumo parameter c must be non-zero");
  if (c.u0.size() != dim)
    throw ConfigError("u0", "expected " + std::to_string(dim) + " components");
  if (!(c.t_end > c.t0))
    throw ConfigError("t_end", "must exceed t0");
  if (c.slices <= 0)
    throw ConfigError("slices", "must be positive");
  if (c.nf <= 0 || c.nf % c.slices != 0)
    throw ConfigError("nf", "must be a positive multiple of slices (" +
                                std::to_string(c.slices) + ")");
  if (c.ng <= 0 || c.ng % c.slices != 0)
    throw ConfigError("ng", "must be a positive multiple of slices (" +
                                std::to_string(c.slices) + ")");
  for (auto [name, order] : {std::pair{"fine_order", c.fine_order},
                             std::pair{"coarse_order", c.coarse_order}})
    if (order != 1 && order != 2 && order != 4)
      throw ConfigError(name, "RK order must be 1, 2 or 4");
  if (!(c.tol > 0.0))
    throw ConfigError("tol", "tolerance must be positive");
  if (c.workers == 0)
    throw ConfigError("workers", "must be positive");
  if (c.grid.min.size() != c.grid.max.size() || c.grid.min.size() != c.grid.count.size())
    throw ConfigError("grid_count", "grid_min, grid_max and grid_count need equal lengths");
  for (std::size_t i = 0; i < c.grid.count.size(); ++i) {
    if (c.grid.count[i] < 1)
      throw ConfigError("grid_count", "grid counts must be >= 1");
    if (c.grid.max[i] < c.grid.min[i])
      throw ConfigError("grid_max", "grid_max must not be below grid_min");
  }
}

std::string canonical_key(std::string_view key) {
  std::string k(trim(key));
  while (!k.empty() && k.front() == '-')
    k.erase(k.begin());
  for (auto& ch : k) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ch == '-')
      ch = '_';
  }
  if (k == "tmax")
    return "t_end";
  return k;
}

bool is_known_key(std::string_view key) {
  return std::find(kKeys.begin(), kKeys.end(), canonical_key(key)) != kKeys.end();
}

std::vector<ConfigEntry> parse_entries(std::string_view text) {
  std::vector<ConfigEntry> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", "expected 'key = value'", line_no);
    const std::string key = canonical_key(line.substr(0, eq));
    if (!is_known_key(key))
      throw ConfigError(key, "unknown key", line_no);
    out.push_back({key, std::string(trim(line.substr(eq + 1))), line_no});
    if (eol == text.size())
      break;
  }
  return out;
}

ExperimentConfig resolve(const std::vector<ConfigEntry>& entries) {
  std::string system = "fhn";
  for (const auto& e : entries)
    if (canonical_key(e.key) == "system")
      system = std::string(trim(e.value));

  ExperimentConfig c;
  try {
    c = ExperimentConfig::defaults(system);
  } catch (const ConfigError&) {
    int line = 0;
    for (const auto& e : entries)
      if (canonical_key(e.key) == "system")
        line = e.line;
    throw ConfigError("system", "unknown system '" + system + "'", line);
  }
  for (auto e : entries) {
    e.key = canonical_key(e.key);
    apply(c, e);
  }

  try {
    validate(c);
  } catch (const ConfigError& err) {
    // Point at the line that set the offending field, when there is one.
    int line = 0;
    for (const auto& e : entries)
      if (canonical_key(e.key) == err.field())
        line = e.line;
    if (line > 0)
      throw ConfigError(err.field(), err.reason(), line);
    throw;
  }
  return c;
}

ExperimentConfig parse_config(std::string_view text) { return resolve(parse_entries(text)); }

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "system = " << c.system << '\n'
     << "params = " << join(c.params) << '\n'
     << "u0 = " << join(c.u0) << '\n'
     << "t0 = " << format_double(c.t0) << '\n'
     << "t_end = " << format_double(c.t_end) << '\n'
     << "slices = " << c.slices << '\n'
     << "nf = " << c.nf << '\n'
     << "ng = " << c.ng << '\n'
     << "fine_order = " << c.fine_order << '\n'
     << "coarse_order = " << c.coarse_order << '\n'
     << "tol = " << format_double(c.tol) << '\n'
     << "workers = " << c.workers << '\n'
     << "mode = " << to_string(c.mode) << '\n'
     << "legacy_in = " << c.legacy_in << '\n'
     << "legacy_out = " << c.legacy_out << '\n'
     << "out_dir = " << c.out_dir << '\n'
     << "grid_min = " << join(c.grid.min) << '\n'
     << "grid_max = " << join(c.grid.max) << '\n'
     << "grid_count = " << join(c.grid.count) << '\n';
  return os.str();
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), r.ptr);
}

std::vector<double> parse_doubles(std::string_view text, const std::string& field, int line) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty())
    return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    out.push_back(parse_double(piece, field, line));
    if (comma == std::string_view::npos)
      break;
    pos = comma + 1;
  }
  return out;
}

} // namespace gparareal
