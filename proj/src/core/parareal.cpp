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

#include "parareal.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace gparareal {

const char* to_string(Outcome outcome) {
  switch (outcome) {
  case Outcome::converged:
    return "converged";
  case Outcome::blow_up:
    return "blow_up";
  case Outcome::exhausted:
    return "exhausted";
  case Outcome::ill_conditioned:
    return "ill_conditioned";
  case Outcome::iteration_limit:
    return "iteration_limit";
  }
  return "unknown";
}

int check_convergence(std::span<const State> current, std::span<const State> previous,
                      double tol, int frontier) {
  if (current.size() != previous.size())
    throw DimensionMismatch("iterates differ in length");
  const int last = static_cast<int>(current.size()) - 1;
  int n = frontier;
  while (n < last) {
    const auto& a = current[n + 1];
    const auto& b = previous[n + 1];
    bool ok = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      // written so that NaN counts as a violation
      if (!(std::abs(a[i] - b[i]) < tol)) {
        ok = false;
        break;
      }
    }
    if (!ok)
      break;
    ++n;
  }
  return n;
}

double max_abs_difference(std::span<const State> current, std::span<const State> previous) {
  double m = 0.0;
  for (std::size_t j = 0; j < current.size(); ++j)
    for (std::size_t i = 0; i < current[j].size(); ++i)
      m = std::max(m, std::abs(current[j][i] - previous[j][i]));
  return m;
}

namespace detail {

Instrumentation::Instrumentation(ConvergenceReport& report, ScheduleLog* log)
    : report_(report), log_(log), start_(Clock::now()) {}

State Instrumentation::coarse(const SlicePropagator& g, std::span<const double> u,
                              int iteration, int slice) {
  const double t0 = log_ ? log_->now() : 0.0;
  const auto c0 = Clock::now();
  State out;
  try {
    out = g(u);
  } catch (const BlowUp& e) {
    throw e.at(slice, iteration);
  }
  const double dt = std::chrono::duration<double>(Clock::now() - c0).count();
  report_.phases.coarse += dt;
  report_.coarse_task_seconds.push_back(dt);
  if (log_)
    log_->record(iteration, slice, "coarse", t0, log_->now());
  return out;
}

std::vector<State> Instrumentation::fine_batch(const SlicePropagator& f,
                                               std::span<const State> states, int first,
                                               int last, int iteration,
                                               std::size_t workers) {
  ScopedTimer timer(report_.phases.fine);
  const auto count = static_cast<std::size_t>(last - first);
  std::vector<double> seconds(count);
  try {
    auto out = parallel_map<State>(count, workers, [&](std::size_t idx) {
      const int slice = first + static_cast<int>(idx);
      const double t0 = log_ ? log_->now() : 0.0;
      const auto c0 = Clock::now();
      State r = f(states[slice]);
      seconds[idx] = std::chrono::duration<double>(Clock::now() - c0).count();
      if (log_)
        log_->record(iteration, slice, "fine", t0, log_->now());
      return r;
    });
    report_.fine_task_seconds.insert(report_.fine_task_seconds.end(), seconds.begin(),
                                     seconds.end());
    return out;
  } catch (const TaskFailure& failure) {
    try {
      failure.rethrow_cause();
    } catch (const BlowUp& e) {
      throw e.at(first + static_cast<int>(failure.index()), iteration);
    }
  }
}

void Instrumentation::finish() {
  report_.phases.total = std::chrono::duration<double>(Clock::now() - start_).count();
}

void check_finite(std::span<const double> u, int slice, int iteration) {
  for (double v : u)
    if (!std::isfinite(v))
      throw BlowUp(0, slice, iteration);
}

} // namespace detail

PararealResult run_parareal(const OdeSystem& system, const SolverSpec& fine,
                            const SolverSpec& coarse, const TimeMesh& mesh, double tol,
                            const RunOptions& options) {
  validate(system);
  if (!(tol >= 0.0))
    throw ParameterError("tolerance must be non-negative");
  const SlicePropagator F(system, fine, mesh);
  const SlicePropagator G(system, coarse, mesh);
  const int J = mesh.slices();

  PararealResult result;
  result.table.mesh = mesh;
  auto& U = result.table.states;
  auto& report = result.report;
  if (options.schedule)
    options.schedule->reset_origin();
  detail::Instrumentation inst(report, options.schedule);

  // G(U^{k-1}_j) from the sweep that produced the current iterate.
  std::vector<State> g_prev(J);

  try {
    U.assign(J + 1, State{});
    U[0] = system.u0;
    for (int j = 0; j < J; ++j) {
      g_prev[j] = inst.coarse(G, U[j], 0, j);
      U[j + 1] = g_prev[j];
    }

    int frontier = 0;
    for (int k = 1; k <= J; ++k) {
      if (options.max_iterations > 0 && k > options.max_iterations) {
        report.outcome = Outcome::iteration_limit;
        break;
      }
      const auto f_vals = inst.fine_batch(F, U, frontier, J, k, options.workers);

      std::vector<State> next = U;
      const int forced = frontier + 1;
      next[forced] = f_vals[0];
      for (int j = forced; j < J; ++j) {
        const State g = inst.coarse(G, next[j], k, j);
        ScopedTimer t(inst.overhead());
        const State& f = f_vals[j - frontier];
        State& out = next[j + 1];
        for (std::size_t i = 0; i < g.size(); ++i)
          out[i] = g[i] + (f[i] - g_prev[j][i]);
        detail::check_finite(out, j, k);
        g_prev[j] = g;
      }

      {
        ScopedTimer t(inst.overhead());
        report.error_history.push_back(max_abs_difference(next, U));
        frontier = check_convergence(next, U, tol, forced);
        U = std::move(next);
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
    if (e.iteration() > report.iterations)
      report.iterations = e.iteration();
    for (auto& row : U)
      if (row.empty())
        row.assign(system.dim, std::nan(""));
  }
  inst.finish();
  return result;
}

} // namespace gparareal
