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

#include <optional>
#include <vector>

#include "gp_emulator.hpp"
#include "parareal.hpp"

namespace gparareal {

struct GpararealOptions : RunOptions {
  /// Archived (x, F(x) - G(x)) rows from earlier runs with the same solvers.
  const ResidualDataset* legacy = nullptr;
  /// Starting hyperparameters per output dimension; (1, 1) when unset.
  std::optional<std::vector<Hyperparameters>> initial_theta;
  OptimizerOptions optimizer;
};

struct GpararealResult {
  SolutionTable table;
  ConvergenceReport report;
  /// Rows gathered during this run; reusable as legacy data.
  ResidualDataset acquisition;
  /// Hyperparameters of the last conditioned emulator.
  std::vector<Hyperparameters> theta;
};

/// Concatenates acquisition then legacy rows, dropping legacy rows whose input
/// already occurs (acquisition wins). Provenance tags are preserved.
ResidualDataset merge_legacy(const ResidualDataset& acquisition,
                             const ResidualDataset& legacy);

struct RefineResult {
  /// Refined values at nodes frontier+1 .. J.
  std::vector<State> values;
  /// G at nodes frontier .. J-1 (the inputs of each step).
  std::vector<State> coarse;
  /// Posterior variance of the correction at nodes frontier .. J-1.
  std::vector<State> variance;
};

/// Serial refinement V_{j+1} = mean(V_j) + G(V_j) from the converged value
/// `seed` at node `frontier`. The variance is recorded, not propagated.
RefineResult refine_sweep(const GpEmulator& emulator, const SlicePropagator& coarse,
                          const TimeMesh& mesh, int frontier, std::span<const double> seed);

/// Parareal with the F - G correction inferred by a GP emulator conditioned on
/// all acquisition data (plus optional legacy data).
GpararealResult run_gparareal(const OdeSystem& system, const SolverSpec& fine,
                              const SolverSpec& coarse, const TimeMesh& mesh, double tol,
                              const GpararealOptions& options = {});

} // namespace gparareal
