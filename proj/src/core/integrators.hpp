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
#include <span>
#include <vector>

#include "ode_system.hpp"

namespace gparareal {

enum class SolverRole { fine, coarse };

/// Fixed-step explicit RK propagator. `steps_total` counts steps over the
/// whole integration window, so the step size is window / steps_total.
struct SolverSpec {
  int order = 4;
  std::int64_t steps_total = 1;
  SolverRole role = SolverRole::fine;

  bool operator==(const SolverSpec&) const = default;
};

void validate(const SolverSpec& spec);

/// Uniform mesh t_j = t0 + j * dt, j = 0..J.
class TimeMesh {
public:
  TimeMesh(double t0, double t_end, int slices);

  double t0() const { return t0_; }
  double t_end() const { return t_end_; }
  int slices() const { return slices_; }
  double slice_width() const { return (t_end_ - t0_) / slices_; }
  double node(int j) const;
  std::vector<double> nodes() const;

  bool operator==(const TimeMesh&) const = default;

private:
  double t0_;
  double t_end_;
  int slices_;
};

/// Runs `steps` RK steps of size `h` from `u` in place. Throws BlowUp with the
/// 1-based index of the first step that produced a non-finite component.
void rk_advance(const VectorField& rhs, int order, double h, std::int64_t steps,
                std::span<double> u);

/// Propagates `u` from t_start to t_end with the spec's fixed step size.
/// The interval must hold a whole number of steps.
State propagate(const OdeSystem& system, const SolverSpec& spec, std::span<const double> u,
                double t_start, double t_end);

/// One-slice propagator bound to a system, solver and mesh. This is the F / G
/// operator of the time-parallel drivers.
class SlicePropagator {
public:
  SlicePropagator(const OdeSystem& system, const SolverSpec& spec, const TimeMesh& mesh);

  State operator()(std::span<const double> u) const;

  const SolverSpec& spec() const { return spec_; }
  std::int64_t steps_per_slice() const { return steps_per_slice_; }
  double step_size() const { return h_; }

private:
  const OdeSystem* system_;
  SolverSpec spec_;
  std::int64_t steps_per_slice_;
  double h_;
};

/// Sequential reference U_{j+1} = F(U_j), U_0 = u0. Blow-ups carry the slice.
std::vector<State> serial_fine_solve(const OdeSystem& system, const SolverSpec& fine,
                                     const TimeMesh& mesh);

} // namespace gparareal
