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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "integrators.hpp"
#include "runtime.hpp"

namespace gparareal {

enum class Outcome {
  converged,
  blow_up,
  exhausted,       // needed k = J; the table is the serial fine solution
  ill_conditioned, // emulator could not be conditioned
  iteration_limit, // stopped early by RunOptions::max_iterations
};

const char* to_string(Outcome outcome);

/// Solution values at the mesh nodes, one row per node (J + 1 rows).
struct SolutionTable {
  TimeMesh mesh{0.0, 1.0, 1};
  std::vector<State> states;
};

struct NodeVariance {
  int iteration = 0;
  int node = 0;
  State variance;
};

struct ConvergenceReport {
  int iterations = 0; // k
  /// Frontier I after each iteration 1..k.
  std::vector<int> frontier_history;
  /// max_j max_i |U^k_j - U^{k-1}_j| after each iteration 1..k.
  std::vector<double> error_history;
  Outcome outcome = Outcome::converged;
  int failed_slice = -1;
  std::string message;

  PhaseTimes phases;
  std::vector<double> fine_task_seconds;
  std::vector<double> coarse_task_seconds;

  // Emulator diagnostics (empty for classic parareal).
  std::vector<std::size_t> dataset_rows;
  std::vector<NodeVariance> posterior_variance;
  std::vector<bool> optimizer_diverged;
};

struct RunOptions {
  std::size_t workers = 1;
  ScheduleLog* schedule = nullptr;
  /// Stop after this many iterations (0: run until I = J).
  int max_iterations = 0;
};

struct PararealResult {
  SolutionTable table;
  ConvergenceReport report;
};

/// Largest n >= frontier such that every node j in (frontier, n] satisfies
/// max_i |current_j[i] - previous_j[i]| < tol. Never below `frontier`.
int check_convergence(std::span<const State> current, std::span<const State> previous,
                      double tol, int frontier);

/// max over nodes and components of |current - previous|.
double max_abs_difference(std::span<const State> current, std::span<const State> previous);

/// Classic parareal with a sliding convergence frontier. Only unconverged
/// slices are fine-propagated; converged nodes are frozen.
PararealResult run_parareal(const OdeSystem& system, const SolverSpec& fine,
                            const SolverSpec& coarse, const TimeMesh& mesh, double tol,
                            const RunOptions& options = {});

namespace detail {

/// Timing and schedule bookkeeping shared by the drivers.
class Instrumentation {
public:
  Instrumentation(ConvergenceReport& report, ScheduleLog* log);

  /// G(u) run serially; the sample feeds T_G.
  State coarse(const SlicePropagator& g, std::span<const double> u, int iteration, int slice);

  /// F on nodes [first, last) of `states`, through parallel_map. Blow-ups are
  /// rethrown as BlowUp tagged with slice and iteration.
  std::vector<State> fine_batch(const SlicePropagator& f, std::span<const State> states,
                                int first, int last, int iteration, std::size_t workers);

  double& overhead() { return report_.phases.overhead; }
  double& emulator_condition() { return report_.phases.emulator_condition; }
  double& emulator_optimize() { return report_.phases.emulator_optimize; }

  void finish();

private:
  ConvergenceReport& report_;
  ScheduleLog* log_;
  Clock::time_point start_;
};

void check_finite(std::span<const double> u, int slice, int iteration);

} // namespace detail

} // namespace gparareal
