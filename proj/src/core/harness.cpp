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

#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

#include <json.hpp>

#include "errors.hpp"

namespace gparareal {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

fs::path output_dir(const ExperimentConfig& c) {
  fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// NaN and infinities become JSON null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json numbers(std::span<const double> values) {
  Json out = Json::array();
  for (double v : values)
    out.push_back(number(v));
  return out;
}

double per_slice_fine_seconds(const RunRecord& run, int slices) {
  if (run.mode == Mode::fine)
    return run.report.phases.fine / slices;
  return median(run.report.fine_task_seconds);
}

PredictedTimes prediction(const RunRecord& run, int slices) {
  CostModel m;
  m.fine_seconds = per_slice_fine_seconds(run, slices);
  m.coarse_seconds = median(run.report.coarse_task_seconds);
  m.slices = slices;
  m.iterations = std::max(run.report.iterations, 1);
  if (!(m.fine_seconds > 0.0) || !std::isfinite(m.fine_seconds) ||
      !std::isfinite(m.coarse_seconds))
    return {kNaN, kNaN, kNaN};
  return predict_times(m);
}

void emit(std::ostream* log, const std::string& line) {
  if (log)
    *log << line << '\n';
}

std::string summary(const char* name, const RunRecord& r) {
  std::string s = std::string(name) + ": " + to_string(r.report.outcome) + ", k = " +
                  std::to_string(r.report.iterations);
  if (!r.report.message.empty())
    s += " (" + r.report.message + ")";
  return s;
}

double max_error(const std::vector<State>& a, const std::vector<State>& b, std::size_t j) {
  double e = 0.0;
  for (std::size_t i = 0; i < a[j].size(); ++i) {
    const double d = std::abs(a[j][i] - b[j][i]);
    if (std::isnan(d))
      return kNaN;
    e = std::max(e, d);
  }
  return e;
}

} // namespace

LegacyInput prepare_legacy(const LegacyArchive& archive, const ExperimentConfig& config) {
  if (archive.header.dim != config.u0.size())
    throw ArchiveError("legacy archive has dimension " + std::to_string(archive.header.dim) +
                       ", the " + config.system + " system has " +
                       std::to_string(config.u0.size()));
  LegacyInput in;
  in.header = archive.header;
  in.data = ResidualDataset(archive.header.dim);
  for (std::size_t r = 0; r < archive.data.size(); ++r)
    in.data.add(archive.data.input(r), archive.data.output(r), Provenance::legacy);
  in.warnings = check_compatibility(archive.header, make_header(config));
  return in;
}

std::optional<LegacyInput> load_legacy(const ExperimentConfig& config) {
  if (config.legacy_in.empty())
    return std::nullopt;
  return prepare_legacy(archive_read(config.legacy_in), config);
}

bool RunRecord::succeeded() const {
  return report.outcome == Outcome::converged || report.outcome == Outcome::exhausted;
}

RunRecord run_mode(const OdeSystem& system, Mode mode, const SolverSpec& fine,
                   const SolverSpec& coarse, const TimeMesh& mesh, double tol,
                   const GpararealOptions& options) {
  RunRecord r;
  r.mode = mode;
  switch (mode) {
  case Mode::fine: {
    r.table.mesh = mesh;
    const auto start = Clock::now();
    try {
      r.table.states = serial_fine_solve(system, fine, mesh);
    } catch (const BlowUp& e) {
      r.report.outcome = Outcome::blow_up;
      r.report.failed_slice = e.slice();
      r.report.message = e.what();
      r.table.states.assign(mesh.slices() + 1, State(system.dim, kNaN));
    }
    r.report.phases.fine = r.report.phases.total = seconds_since(start);
    break;
  }
  case Mode::parareal: {
    auto p = run_parareal(system, fine, coarse, mesh, tol, options);
    r.table = std::move(p.table);
    r.report = std::move(p.report);
    break;
  }
  case Mode::gparareal: {
    auto g = run_gparareal(system, fine, coarse, mesh, tol, options);
    r.table = std::move(g.table);
    r.report = std::move(g.report);
    r.acquisition = std::move(g.acquisition);
    r.theta = std::move(g.theta);
    if (options.legacy)
      r.legacy_rows = options.legacy->size();
    break;
  }
  }
  return r;
}

RunRecord run_experiment(const ExperimentConfig& config, ScheduleLog* schedule,
                         const LegacyInput* legacy) {
  validate(config);
  const OdeSystem system = config.build_system();
  std::vector<std::string> warnings;

  std::optional<LegacyInput> loaded;
  if (config.mode == Mode::gparareal) {
    if (!legacy && (loaded = load_legacy(config)))
      legacy = &*loaded;
  } else if (legacy || !config.legacy_in.empty()) {
    warnings.push_back("legacy data is only used in gparareal mode");
    legacy = nullptr;
  }

  GpararealOptions options;
  options.workers = config.workers;
  options.schedule = schedule;
  options.optimizer.workers = std::min(config.workers, system.dim);
  if (legacy) {
    options.legacy = &legacy->data;
    // Start from the archived hyperparameters, they were fitted to these rows.
    if (legacy->header.theta.size() == system.dim)
      options.initial_theta = legacy->header.theta;
    warnings.insert(warnings.end(), legacy->warnings.begin(), legacy->warnings.end());
  }

  RunRecord r = run_mode(system, config.mode, config.fine(), config.coarse(), config.mesh(),
                         config.tol, options);
  r.warnings.insert(r.warnings.begin(), warnings.begin(), warnings.end());
  return r;
}

std::string report_json(const ExperimentConfig& config, const RunRecord& run) {
  const auto& rep = run.report;
  const int J = config.slices;
  Json j;
  j["system"] = config.system;
  j["mode"] = to_string(run.mode);
  j["outcome"] = to_string(rep.outcome);
  j["k"] = rep.iterations;
  j["slices"] = J;
  j["tol"] = config.tol;
  j["workers"] = config.workers;
  j["I_history"] = rep.frontier_history;
  j["error_history"] = numbers(rep.error_history);
  if (rep.failed_slice >= 0)
    j["failed_slice"] = rep.failed_slice;
  if (!rep.message.empty())
    j["message"] = rep.message;

  const auto& ph = rep.phases;
  j["phases"] = {{"coarse", ph.coarse},
                 {"fine", ph.fine},
                 {"emulator_condition", ph.emulator_condition},
                 {"emulator_optimize", ph.emulator_optimize},
                 {"overhead", ph.overhead},
                 {"total", ph.total}};

  const double tf = per_slice_fine_seconds(run, J);
  const auto pred = prediction(run, J);
  const double serial_estimate = J * tf;
  j["timing"] = {{"T_F_median", number(tf)},
                 {"T_G_median", number(median(rep.coarse_task_seconds))},
                 {"fine_tasks", rep.fine_task_seconds.size()},
                 {"coarse_tasks", rep.coarse_task_seconds.size()}};
  j["speedup"] = {{"predicted_serial", number(pred.serial)},
                  {"predicted_parallel", number(pred.parallel)},
                  {"predicted", number(pred.speedup)},
                  {"serial_estimate", number(serial_estimate)},
                  {"measured_parallel", ph.total},
                  {"measured", number(ph.total > 0 ? serial_estimate / ph.total : kNaN)}};

  if (run.mode == Mode::gparareal) {
    j["dataset_rows"] = rep.dataset_rows;
    j["legacy_rows"] = run.legacy_rows;
    Json theta = Json::array();
    for (const auto& t : run.theta)
      theta.push_back({{"sigma2", t.sigma2}, {"ell2", t.ell2}});
    j["theta"] = theta;
    j["optimizer_diverged"] =
        std::any_of(rep.optimizer_diverged.begin(), rep.optimizer_diverged.end(),
                    [](bool b) { return b; });
    Json var = Json::array();
    for (const auto& v : rep.posterior_variance)
      var.push_back({{"iteration", v.iteration}, {"node", v.node}, {"variance", numbers(v.variance)}});
    j["posterior_variance"] = var;
  }
  j["warnings"] = run.warnings;
  return j.dump(2) + "\n";
}

void write_solution_csv(std::ostream& os, const SolutionTable& table) {
  const std::size_t d = table.states.empty() ? 0 : table.states.front().size();
  os << 't';
  for (std::size_t i = 1; i <= d; ++i)
    os << ",u" << i;
  os << '\n';
  for (std::size_t j = 0; j < table.states.size(); ++j) {
    os << format_double(table.mesh.node(static_cast<int>(j)));
    for (double v : table.states[j])
      os << ',' << format_double(v);
    os << '\n';
  }
}

int cmd_solve(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  const fs::path dir = output_dir(config);
  ScheduleLog schedule;
  RunRecord run = run_experiment(config, &schedule);

  if (!config.legacy_out.empty()) {
    if (run.mode == Mode::gparareal)
      archive_write(config.legacy_out,
                    {make_header(config, run.theta), run.acquisition});
    else
      run.warnings.push_back("legacy_out needs gparareal mode; no archive written");
  }

  {
    auto out = open_output(dir / "solution.csv");
    write_solution_csv(out, run.table);
  }
  {
    auto out = open_output(dir / "report.json");
    out << report_json(config, run);
  }
  {
    auto out = open_output(dir / "schedule.csv");
    schedule.write_csv(out);
  }

  emit(log, summary(to_string(run.mode), run));
  for (const auto& w : run.warnings)
    emit(log, "warning: " + w);
  emit(log, "wrote " + (dir / "solution.csv").string() + ", report.json, schedule.csv");
  return run.succeeded() ? kExitOk : kExitNotConverged;
}

std::vector<State> grid_points(const GridSpec& grid) {
  std::vector<State> points{State{}};
  for (std::size_t d = 0; d < grid.count.size(); ++d) {
    std::vector<State> next;
    const int n = grid.count[d];
    for (const auto& p : points)
      for (int i = 0; i < n; ++i) {
        State q = p;
        q.push_back(n == 1 ? grid.min[d]
                           : grid.min[d] + (grid.max[d] - grid.min[d]) * i / (n - 1));
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  return points;
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& config) {
  validate(config);
  if (config.grid.count.size() != 2 || config.u0.size() != 2)
    throw ConfigError("grid_count", "sweeps need a 2-dimensional grid over a 2-dimensional system");
  const auto legacy = load_legacy(config);
  const auto points = grid_points(config.grid);

  struct Algorithm {
    const char* name;
    Mode mode;
    const LegacyInput* legacy;
  };
  std::vector<Algorithm> algorithms = {{"parareal", Mode::parareal, nullptr},
                                       {"gparareal", Mode::gparareal, nullptr}};
  if (legacy)
    algorithms.push_back({"gparareal_legacy", Mode::gparareal, &*legacy});

  auto rows = parallel_map<std::vector<SweepCell>>(
      points.size(), config.workers, [&](std::size_t c) {
        std::vector<SweepCell> out;
        for (const auto& alg : algorithms) {
          ExperimentConfig cell = config;
          cell.u0 = points[c];
          cell.mode = alg.mode;
          cell.workers = 1;
          cell.legacy_in.clear();
          SweepCell row{points[c][0], points[c][1], alg.name, 0, "error", false};
          try {
            const RunRecord r = run_experiment(cell, nullptr, alg.legacy);
            row.k = r.report.iterations;
            row.status = to_string(r.report.outcome);
            row.ok = r.succeeded();
          } catch (const std::exception&) {
            // recorded as an "error" cell
          }
          out.push_back(std::move(row));
        }
        return out;
      });

  std::vector<SweepCell> cells;
  for (auto& r : rows)
    cells.insert(cells.end(), r.begin(), r.end());
  return cells;
}

void write_heatmap_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
  os << "u01,u02,algorithm,k,status\n";
  for (const auto& c : cells)
    os << format_double(c.u01) << ',' << format_double(c.u02) << ',' << c.algorithm << ','
       << (c.ok ? std::to_string(c.k) : std::string("nan")) << ',' << c.status << '\n';
}

int cmd_sweep(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  const fs::path dir = output_dir(config);
  const auto cells = run_sweep(config);
  {
    auto out = open_output(dir / "heatmap.csv");
    write_heatmap_csv(out, cells);
  }
  std::map<std::string, std::pair<int, int>> tally; // converged, total
  for (const auto& c : cells) {
    auto& t = tally[c.algorithm];
    t.first += c.ok;
    t.second += 1;
  }
  for (const auto& [name, t] : tally)
    emit(log, name + ": " + std::to_string(t.first) + "/" + std::to_string(t.second) +
                  " cells converged");
  emit(log, "wrote " + (dir / "heatmap.csv").string());
  return kExitOk;
}

int cmd_compare(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  const fs::path dir = output_dir(config);
  const OdeSystem system = config.build_system();
  const TimeMesh mesh = config.mesh();

  const auto start = Clock::now();
  const auto reference = serial_fine_solve(system, config.fine(), mesh);
  const double serial_seconds = seconds_since(start);

  const auto legacy = load_legacy(config);
  std::vector<std::pair<std::string, RunRecord>> runs;
  {
    ExperimentConfig c = config;
    c.legacy_in.clear();
    c.mode = Mode::parareal;
    runs.emplace_back("parareal", run_experiment(c));
    c.mode = Mode::gparareal;
    runs.emplace_back("gparareal", run_experiment(c));
    if (legacy)
      runs.emplace_back("gparareal_legacy", run_experiment(c, nullptr, &*legacy));
  }

  {
    auto out = open_output(dir / "errors.csv");
    out << 't';
    for (const auto& [name, r] : runs)
      out << ',' << name;
    out << '\n';
    for (int j = 0; j <= mesh.slices(); ++j) {
      out << format_double(mesh.node(j));
      for (const auto& [name, r] : runs)
        out << ',' << format_double(max_error(r.table.states, reference, j));
      out << '\n';
    }
  }

  Json j;
  j["system"] = config.system;
  j["slices"] = config.slices;
  j["serial_fine_seconds"] = serial_seconds;
  Json algs = Json::object();
  bool all_ok = true;
  for (const auto& [name, r] : runs) {
    double worst = 0.0;
    for (int n = 0; n <= mesh.slices(); ++n)
      worst = std::max(worst, max_error(r.table.states, reference, n));
    const auto pred = prediction(r, config.slices);
    algs[name] = {{"outcome", to_string(r.report.outcome)},
                  {"k", r.report.iterations},
                  {"max_error", number(worst)},
                  {"total_seconds", r.report.phases.total},
                  {"measured_speedup", number(serial_seconds / r.report.phases.total)},
                  {"predicted_speedup", number(pred.speedup)},
                  {"warnings", r.warnings}};
    all_ok = all_ok && r.succeeded();
    emit(log, summary(name.c_str(), r) + ", max error " + format_double(worst));
  }
  j["algorithms"] = algs;
  {
    auto out = open_output(dir / "compare.json");
    out << j.dump(2) << '\n';
  }
  emit(log, "wrote " + (dir / "errors.csv").string() + ", compare.json");
  return all_ok ? kExitOk : kExitNotConverged;
}

} // namespace gparareal
