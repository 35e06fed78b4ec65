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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "archive.hpp"
#include "config.hpp"
#include "gparareal.hpp"

namespace gparareal {

/// Legacy archive prepared for a run: rows retagged as legacy, plus
/// compatibility warnings against the run's solver setup.
struct LegacyInput {
  ArchiveHeader header;
  ResidualDataset data;
  std::vector<std::string> warnings;
};

LegacyInput prepare_legacy(const LegacyArchive& archive, const ExperimentConfig& config);
std::optional<LegacyInput> load_legacy(const ExperimentConfig& config);

struct RunRecord {
  Mode mode = Mode::gparareal;
  SolutionTable table;
  ConvergenceReport report;
  ResidualDataset acquisition; // empty unless mode == gparareal
  std::vector<Hyperparameters> theta;
  std::size_t legacy_rows = 0;
  std::vector<std::string> warnings;

  /// Converged, or exhausted all J iterations (the exact fine solution).
  bool succeeded() const;
};

/// One solve on an arbitrary system. `options.legacy` is honoured only in
/// gparareal mode.
RunRecord run_mode(const OdeSystem& system, Mode mode, const SolverSpec& fine,
                   const SolverSpec& coarse, const TimeMesh& mesh, double tol,
                   const GpararealOptions& options);

/// One solve as configured. The archive named by `legacy_in` is read unless
/// `legacy` is supplied by the caller.
RunRecord run_experiment(const ExperimentConfig& config, ScheduleLog* schedule = nullptr,
                         const LegacyInput* legacy = nullptr);

/// Pretty-printed JSON: iteration counts, histories, phase timings and the
/// predicted vs measured speedup.
std::string report_json(const ExperimentConfig& config, const RunRecord& run);

void write_solution_csv(std::ostream& os, const SolutionTable& table);

/// Exit statuses of the commands.
enum ExitStatus { kExitOk = 0, kExitConfig = 1, kExitNotConverged = 2 };

/// Writes solution.csv, report.json and schedule.csv under out_dir (and the
/// legacy_out archive when set). Progress lines go to `log` when given.
int cmd_solve(const ExperimentConfig& config, std::ostream* log = nullptr);

struct SweepCell {
  double u01 = 0.0;
  double u02 = 0.0;
  std::string algorithm;
  int k = 0;
  std::string status; // an Outcome name, or "error"
  bool ok = false;
};

std::vector<State> grid_points(const GridSpec& grid);

/// Runs every grid point with each algorithm (cells in parallel, one worker
/// each) and returns rows ordered by cell, then algorithm.
std::vector<SweepCell> run_sweep(const ExperimentConfig& config);
void write_heatmap_csv(std::ostream& os, const std::vector<SweepCell>& cells);

/// Writes heatmap.csv under out_dir. Per-cell failures never abort the sweep.
int cmd_sweep(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Writes errors.csv (per node, max over dimensions of |algorithm - serial
/// fine|) and compare.json under out_dir.
int cmd_compare(const ExperimentConfig& config, std::ostream* log = nullptr);

} // namespace gparareal
