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

#include "gparareal.hpp"

#include <cmath>

#include "errors.hpp"

namespace gparareal {

ResidualDataset merge_legacy(const ResidualDataset& acquisition,
                             const ResidualDataset& legacy) {
  if (!legacy.empty() && !acquisition.empty() && legacy.dim() != acquisition.dim())
    throw DimensionMismatch("legacy data has dimension " + std::to_string(legacy.dim()) +
                            ", acquisition data " + std::to_string(acquisition.dim()));
  ResidualDataset merged = acquisition;
  for (std::size_t r = 0; r < legacy.size(); ++r)
    merged.add(legacy.input(r), legacy.output(r), legacy.provenance(r));
  return merged;
}

namespace {

/// V_{j+1} = mean(V_j) + G(V_j) for j = frontier .. J-1.
template <class CoarseFn, class PredictFn>
RefineResult sweep(int frontier, int slices, int iteration, std::span<const double> seed,
                   CoarseFn&& coarse, PredictFn&& predict) {
  RefineResult out;
  State v(seed.begin(), seed.end());
  for (int j = frontier; j < slices; ++j) {
    State g = coarse(v, j);
    Prediction p = predict(v);
    State next(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      next[i] = p.mean[i] + g[i];
    detail::check_finite(next, j, iteration);
    out.coarse.push_back(std::move(g));
    out.variance.push_back(std::move(p.variance));
    out.values.push_back(next);
    v = std::move(next);
  }
  return out;
}

} // namespace

RefineResult refine_sweep(const GpEmulator& emulator, const SlicePropagator& coarse,
                          const TimeMesh& mesh, int frontier, std::span<const double> seed) {
  if (frontier < 0 || frontier > mesh.slices())
    throw ParameterError("frontier outside the mesh");
  return sweep(
      frontier, mesh.slices(), -1, seed,
      [&](std::span<const double> u, int) { return coarse(u); },
      [&](std::span<const double> u) { return emulator.predict(u); });
}

GpararealResult run_gparareal(const OdeSystem& system, const SolverSpec& fine,
                              const SolverSpec& coarse, const TimeMesh& mesh, double tol,
                              const GpararealOptions& options) {
  validate(system);
  if (!(tol >= 0.0))
    throw ParameterError("tolerance must be non-negative");
  if (options.legacy && !options.legacy->empty() && options.legacy->dim() != system.dim)
    throw DimensionMismatch("legacy data dimension does not match the system");
  const SlicePropagator F(system, fine, mesh);
  const SlicePropagator G(system, coarse, mesh);
  const int J = mesh.slices();

  GpararealResult result;
  result.table.mesh = mesh;
  result.acquisition = ResidualDataset(system.dim);
  result.theta = options.initial_theta.value_or(
      std::vector<Hyperparameters>(system.dim, Hyperparameters{}));
  if (result.theta.size() != system.dim)
    throw DimensionMismatch("need one initial hyperparameter set per state dimension");
  auto& V = result.table.states;
  auto& report = result.report;
  if (options.schedule)
    options.schedule->reset_origin();
  detail::Instrumentation inst(report, options.schedule);

  OptimizerOptions optimizer = options.optimizer;
  optimizer.workers = std::max<std::size_t>(optimizer.workers, 1);

  // G(V^{k-1}_j) cached from the sweep that produced V^{k-1}; every dataset
  // row then costs exactly one fine run.
  std::vector<State> g_prev(J);

  try {
    V.assign(J + 1, State{});
    V[0] = system.u0;
    for (int j = 0; j < J; ++j) {
      g_prev[j] = inst.coarse(G, V[j], 0, j);
      V[j + 1] = g_prev[j];
    }

    int frontier = 0;
    for (int k = 1; k <= J; ++k) {
      if (options.max_iterations > 0 && k > options.max_iterations) {
        report.outcome = Outcome::iteration_limit;
        break;
      }
      const auto f_vals = inst.fine_batch(F, V, frontier, J, k, options.workers);

      ResidualDataset training;
      {
        ScopedTimer t(inst.overhead());
        State y(system.dim);
        for (int j = frontier; j < J; ++j) {
          for (std::size_t i = 0; i < system.dim; ++i)
            y[i] = f_vals[j - frontier][i] - g_prev[j][i];
          result.acquisition.add(V[j], y, Provenance::acquisition);
        }
        report.dataset_rows.push_back(result.acquisition.size());
        training = options.legacy ? merge_legacy(result.acquisition, *options.legacy)
                                  : result.acquisition;
      }

      {
        ScopedTimer t(inst.emulator_optimize());
        auto opt = optimize_hyperparameters(training, result.theta, optimizer);
        result.theta = std::move(opt.theta);
        report.optimizer_diverged.insert(report.optimizer_diverged.end(),
                                         opt.diverged.begin(), opt.diverged.end());
      }
      GpEmulator emulator = [&] {
        ScopedTimer t(inst.emulator_condition());
        return condition(training, result.theta);
      }();

      std::vector<State> next = V;
      const int forced = frontier + 1;
      next[forced] = f_vals[0];
      auto refined = sweep(
          forced, J, k, next[forced],
          [&](std::span<const double> u, int j) { return inst.coarse(G, u, k, j); },
          [&](std::span<const double> u) {
            ScopedTimer t(inst.emulator_condition());
            return emulator.predict(u);
          });

      {
        ScopedTimer t(inst.overhead());
        for (int j = forced; j < J; ++j) {
          const auto idx = static_cast<std::size_t>(j - forced);
          next[j + 1] = std::move(refined.values[idx]);
          g_prev[j] = std::move(refined.coarse[idx]);
          report.posterior_variance.push_back({k, j, std::move(refined.variance[idx])});
        }
        report.error_history.push_back(max_abs_difference(next, V));
        frontier = check_convergence(next, V, tol, forced);
        V = std::move(next);
      }
      report.iterations = k;
      report.frontier_history.push_back(frontier);
      if (frontier == J) {
        report.outcome = k == J ? Outcome::exhausted : Outcome::converged;
        break;
      }
    }
  } catch (const BlowUp& e) {
    report.outcome = Outcome::blow_up;
    report.failed_slice = e.slice();
    report.message = e.what();
    report.iterations = std::max(report.iterations, e.iteration());
  } catch (const IllConditioned& e) {
    report.outcome = Outcome::ill_conditioned;
    report.message = e.what();
    report.iterations += 1;
  }
  for (auto& row : V)
    if (row.empty())
      row.assign(system.dim, std::nan(""));
  inst.finish();
  return result;
}

} // namespace gparareal
