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

#include <doctest.h>

#include <algorithm>
#include <random>

#include "errors.hpp"
#include "gparareal.hpp"
#include "helpers.hpp"

using namespace gparareal;

namespace {

const SolverSpec kFine{4, 800, SolverRole::fine};
const SolverSpec kCoarse{2, 32, SolverRole::coarse};

OdeSystem small_fhn(State u0 = {-1.0, 1.0}) { return make_fhn(0.2, 0.2, 3.0, u0, 0.0, 8.0); }

ResidualDataset rows(std::initializer_list<std::pair<State, State>> list, Provenance p) {
  ResidualDataset d(2);
  for (const auto& [x, y] : list)
    d.add(x, y, p);
  return d;
}

} // namespace

TEST_SUITE("gparareal_core") {

TEST_CASE("merge with empty legacy is the identity") {
  const auto acq = rows({{{0, 0}, {1, 1}}, {{1, 0}, {2, 2}}}, Provenance::acquisition);
  CHECK(merge_legacy(acq, ResidualDataset(2)) == acq);
}

TEST_CASE("merge of disjoint inputs adds the row counts") {
  const auto acq = rows({{{0, 0}, {1, 1}}, {{1, 0}, {2, 2}}}, Provenance::acquisition);
  const auto leg = rows({{{5, 5}, {0, 1}}}, Provenance::legacy);
  const auto m = merge_legacy(acq, leg);
  CHECK(m.size() == 3);
  CHECK(m.provenance(2) == Provenance::legacy);
  CHECK(m.count(Provenance::acquisition) == 2);
}

TEST_CASE("merge keeps the acquisition row on a duplicate input") {
  const auto acq = rows({{{0, 0}, {1, 1}}, {{1, 0}, {2, 2}}}, Provenance::acquisition);
  const auto leg = rows({{{1, 0}, {9, 9}}, {{3, 3}, {0, 0}}}, Provenance::legacy);
  const auto m = merge_legacy(acq, leg);
  CHECK(m.size() == 3);
  CHECK(m.output(1)[0] == 2);
  CHECK(m.provenance(1) == Provenance::acquisition);
}

TEST_CASE("merge rejects mismatched dimensions") {
  ResidualDataset leg(3);
  leg.add(State{0, 0, 0}, State{0, 0, 0}, Provenance::legacy);
  const auto acq = rows({{{0, 0}, {1, 1}}}, Provenance::acquisition);
  CHECK_THROWS_AS(merge_legacy(acq, leg), DimensionMismatch);
}

TEST_CASE("refinement with a zero-mean emulator is the coarse sweep") {
  const auto s = small_fhn();
  const TimeMesh mesh(0.0, 8.0, 8);
  const SlicePropagator G(s, kCoarse, mesh);
  const auto em = GpEmulator::prior(2, {{1.0, 1.0}, {1.0, 1.0}});
  const auto r = refine_sweep(em, G, mesh, 0, s.u0);
  State u = s.u0;
  for (int j = 0; j < 8; ++j) {
    u = G(u);
    CHECK(r.values[j] == u);
  }
  CHECK(r.variance.size() == 8);
  CHECK(r.variance[0] == State{1.0, 1.0});
}

TEST_CASE("refining from a training input reproduces the fine value") {
  const auto s = small_fhn();
  const TimeMesh mesh(0.0, 8.0, 8);
  const SlicePropagator F(s, kFine, mesh), G(s, kCoarse, mesh);
  const State x{0.3, -0.2};
  const State f = F(x), g = G(x);
  ResidualDataset d(2);
  d.add(x, State{f[0] - g[0], f[1] - g[1]}, Provenance::acquisition);
  const auto em = condition(d, std::vector<Hyperparameters>{{1.0, 1.0}, {1.0, 1.0}});
  const auto r = refine_sweep(em, G, mesh, 7, x);
  REQUIRE(r.values.size() == 1);
  CHECK(std::abs(r.values[0][0] - f[0]) < 1e-6);
  CHECK(std::abs(r.values[0][1] - f[1]) < 1e-6);
}

TEST_CASE("coarse equal to fine: zero residuals and one iteration") {
  const auto s = small_fhn();
  const TimeMesh mesh(0.0, 8.0, 8);
  const auto r = run_gparareal(s, kFine, kFine, mesh, 1e-6);
  CHECK(r.report.iterations == 1);
  CHECK(r.report.outcome == Outcome::converged);
  CHECK(r.table.states == serial_fine_solve(s, kFine, mesh));
  for (std::size_t i = 0; i < r.acquisition.size(); ++i)
    CHECK(r.acquisition.output(i)[0] == 0.0);
}

TEST_CASE("tolerance zero exhausts all slices and reproduces the serial solution") {
  const auto s = small_fhn();
  const TimeMesh mesh(0.0, 8.0, 8);
  const auto r = run_gparareal(s, kFine, kCoarse, mesh, 0.0);
  CHECK(r.report.iterations == 8);
  CHECK(r.report.outcome == Outcome::exhausted);
  CHECK(r.table.states == serial_fine_solve(s, kFine, mesh));
}

TEST_CASE("after k iterations the first k+1 rows are exact") {
  const auto s = small_fhn();
  const TimeMesh mesh(0.0, 8.0, 8);
  const auto ref = serial_fine_solve(s, kFine, mesh);
  for (int k = 1; k <= 4; ++k) {
    GpararealOptions o;
    o.max_iterations = k;
    const auto r = run_gparareal(s, kFine, kCoarse, mesh, 0.0, o);
    for (int j = 0; j <= k; ++j)
      CHECK(r.table.states[j] == ref[j]);
  }
}

TEST_CASE("dataset grows by one row per fine run") {
  const auto s = make_fhn(0.2, 0.2, 3.0, {-1.0, 1.0}, 0.0, 40.0);
  const TimeMesh mesh(0.0, 40.0, 40);
  const auto r =
      run_gparareal(s, {4, 16000, SolverRole::fine}, {2, 160, SolverRole::coarse}, mesh, 1e-6);
  CHECK(r.report.outcome == Outcome::converged);
  std::size_t expected = 0;
  int prev = 0;
  for (std::size_t k = 0; k < r.report.frontier_history.size(); ++k) {
    expected += static_cast<std::size_t>(40 - prev);
    CHECK(r.report.dataset_rows[k] == expected);
    prev = r.report.frontier_history[k];
  }
  CHECK(r.acquisition.size() == expected);
  CHECK(std::is_sorted(r.report.frontier_history.begin(), r.report.frontier_history.end()));
}

TEST_CASE("repeated runs and worker counts give identical results") {
  const auto s = small_fhn({0.5, -0.5});
  const TimeMesh mesh(0.0, 8.0, 8);
  GpararealOptions one, many;
  many.workers = 40;
  many.optimizer.workers = 2;
  const auto a = run_gparareal(s, kFine, kCoarse, mesh, 1e-8, one);
  const auto b = run_gparareal(s, kFine, kCoarse, mesh, 1e-8, many);
  const auto c = run_gparareal(s, kFine, kCoarse, mesh, 1e-8, one);
  CHECK(a.table.states == b.table.states);
  CHECK(a.table.states == c.table.states);
  CHECK(a.theta == b.theta);
  CHECK(a.acquisition == b.acquisition);
}

TEST_CASE("legacy row order does not change the solution") {
  const TimeMesh mesh(0.0, 8.0, 8);
  const auto first = run_gparareal(small_fhn(), kFine, kCoarse, mesh, 1e-8);
  ResidualDataset shuffled(2);
  std::vector<std::size_t> order(first.acquisition.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::shuffle(order.begin(), order.end(), std::mt19937_64(3));
  for (auto i : order)
    shuffled.add(first.acquisition.input(i), first.acquisition.output(i), Provenance::legacy);
  ResidualDataset ordered(2);
  for (std::size_t i = 0; i < first.acquisition.size(); ++i)
    ordered.add(first.acquisition.input(i), first.acquisition.output(i), Provenance::legacy);

  const auto s = small_fhn({0.75, 0.25});
  GpararealOptions a, b;
  a.legacy = &ordered;
  b.legacy = &shuffled;
  const auto ra = run_gparareal(s, kFine, kCoarse, mesh, 1e-8, a);
  const auto rb = run_gparareal(s, kFine, kCoarse, mesh, 1e-8, b);
  CHECK(ra.report.iterations == rb.report.iterations);
  for (std::size_t j = 0; j < ra.table.states.size(); ++j)
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(std::abs(ra.table.states[j][i] - rb.table.states[j][i]) < 1e-10);
}

TEST_CASE("legacy data with the wrong dimension is rejected") {
  ResidualDataset leg(3);
  leg.add(State{0, 0, 0}, State{0, 0, 0}, Provenance::legacy);
  GpararealOptions o;
  o.legacy = &leg;
  CHECK_THROWS_AS(run_gparareal(small_fhn(), kFine, kCoarse, TimeMesh(0.0, 8.0, 8), 1e-6, o),
                  DimensionMismatch);
}

TEST_CASE("posterior variance is recorded for every refined node") {
  const TimeMesh mesh(0.0, 8.0, 8);
  const auto r = run_gparareal(small_fhn(), kFine, kCoarse, mesh, 1e-8);
  CHECK_FALSE(r.report.posterior_variance.empty());
  for (const auto& v : r.report.posterior_variance) {
    CHECK(v.variance.size() == 2);
    CHECK(v.iteration >= 1);
    CHECK(v.node >= v.iteration);
    CHECK(v.variance[0] >= 0.0);
  }
}

TEST_CASE("blow-up in the coarse sweep is reported") {
  const auto s = testing::riccati_system(2.0, 4.0);
  const TimeMesh mesh(0.0, 4.0, 4);
  ResidualDataset unused(1);
  const auto r =
      run_gparareal(s, {4, 400, SolverRole::fine}, {4, 40, SolverRole::coarse}, mesh, 1e-6);
  CHECK(r.report.outcome == Outcome::blow_up);
  CHECK(r.table.states.size() == 5);
  CHECK(std::isnan(r.table.states[4][0]));
}

} // TEST_SUITE
