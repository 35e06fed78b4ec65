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

#include "integrators.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace gparareal {

void validate(const SolverSpec& spec) {
  if (spec.order != 1 && spec.order != 2 && spec.order != 4)
    throw ParameterError("RK order must be 1, 2 or 4, got " + std::to_string(spec.order));
  if (spec.steps_total <= 0)
    throw ParameterError("step count must be positive");
}

TimeMesh::TimeMesh(double t0, double t_end, int slices)
    : t0_(t0), t_end_(t_end), slices_(slices) {
  if (slices <= 0)
    throw ParameterError("slice count must be positive");
  if (!(t_end > t0))
    throw ParameterError("mesh requires t_end > t0");
}

double TimeMesh::node(int j) const {
  if (j == slices_)
    return t_end_;
  return t0_ + j * slice_width();
}

std::vector<double> TimeMesh::nodes() const {
  std::vector<double> t(slices_ + 1);
  for (int j = 0; j <= slices_; ++j)
    t[j] = node(j);
  return t;
}

namespace {

bool all_finite(std::span<const double> u) {
  for (double v : u)
    if (!std::isfinite(v))
      return false;
  return true;
}

} // namespace

void rk_advance(const VectorField& rhs, int order, double h, std::int64_t steps,
                std::span<double> u) {
  const std::size_t d = u.size();
  std::vector<double> work(5 * d);
  std::span<double> k1(work.data(), d), k2(work.data() + d, d), k3(work.data() + 2 * d, d),
      k4(work.data() + 3 * d, d), tmp(work.data() + 4 * d, d);
  const double h2 = h / 2.0;
  const double h6 = h / 6.0;

  for (std::int64_t s = 1; s <= steps; ++s) {
    switch (order) {
    case 1:
      rhs(u, k1);
      for (std::size_t i = 0; i < d; ++i)
        u[i] += h * k1[i];
      break;
    case 2: // explicit midpoint
      rhs(u, k1);
      for (std::size_t i = 0; i < d; ++i)
        tmp[i] = u[i] + h2 * k1[i];
      rhs(tmp, k2);
      for (std::size_t i = 0; i < d; ++i)
        u[i] += h * k2[i];
      break;
    case 4:
      rhs(u, k1);
      for (std::size_t i = 0; i < d; ++i)
        tmp[i] = u[i] + h2 * k1[i];
      rhs(tmp, k2);
      for (std::size_t i = 0; i < d; ++i)
        tmp[i] = u[i] + h2 * k2[i];
      rhs(tmp, k3);
      for (std::size_t i = 0; i < d; ++i)
        tmp[i] = u[i] + h * k3[i];
      rhs(tmp, k4);
      for (std::size_t i = 0; i < d; ++i)
        u[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      break;
    default:
      throw ParameterError("RK order must be 1, 2 or 4, got " + std::to_string(order));
    }
    if (!all_finite(u))
      throw BlowUp(s);
  }
}

State propagate(const OdeSystem& system, const SolverSpec& spec, std::span<const double> u,
                double t_start, double t_end) {
  validate(spec);
  if (!(t_end > t_start))
    throw ParameterError("propagate requires t_end > t_start");
  if (u.size() != system.dim)
    throw DimensionMismatch("state dimension does not match system");
  if (!all_finite(u))
    throw BlowUp(0);

  const double h = system.window() / static_cast<double>(spec.steps_total);
  const double exact = (t_end - t_start) / h;
  const auto steps = static_cast<std::int64_t>(std::llround(exact));
  if (steps <= 0 || std::abs(exact - static_cast<double>(steps)) > 1e-6)
    throw ParameterError("interval is not a whole number of solver steps");

  State out(u.begin(), u.end());
  rk_advance(system.rhs, spec.order, h, steps, out);
  return out;
}

SlicePropagator::SlicePropagator(const OdeSystem& system, const SolverSpec& spec,
                                 const TimeMesh& mesh)
    : system_(&system), spec_(spec) {
  validate(spec);
  if (spec.steps_total % mesh.slices() != 0)
    throw ParameterError("step count " + std::to_string(spec.steps_total) +
                         " is not divisible by slice count " +
                         std::to_string(mesh.slices()));
  steps_per_slice_ = spec.steps_total / mesh.slices();
  h_ = system.window() / static_cast<double>(spec.steps_total);
}

State SlicePropagator::operator()(std::span<const double> u) const {
  if (u.size() != system_->dim)
    throw DimensionMismatch("state dimension does not match system");
  if (!all_finite(u))
    throw BlowUp(0);
  State out(u.begin(), u.end());
  rk_advance(system_->rhs, spec_.order, h_, steps_per_slice_, out);
  return out;
}

std::vector<State> serial_fine_solve(const OdeSystem& system, const SolverSpec& fine,
                                     const TimeMesh& mesh) {
  const SlicePropagator prop(system, fine, mesh);
  std::vector<State> states;
  states.reserve(mesh.slices() + 1);
  states.push_back(system.u0);
  for (int j = 0; j < mesh.slices(); ++j) {
    try {
      states.push_back(prop(states.back()));
    } catch (const BlowUp& e) {
      throw e.at(j, -1);
    }
  }
  return states;
}

} // namespace gparareal
