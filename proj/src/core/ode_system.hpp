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

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gparareal {

using State = std::vector<double>;

/// Autonomous vector field: writes f(u) into `du`. Must be a pure function of
/// `u` so that it can be evaluated concurrently from several workers.
using VectorField = std::function<void(std::span<const double> u, std::span<double> du)>;

/// Non-autonomous vector field f(t, u).
using TimeDependentField =
    std::function<void(double t, std::span<const double> u, std::span<double> du)>;

/// An initial value problem u' = f(u), u(t0) = u0 over [t0, t_end], always in
/// autonomous form.
struct OdeSystem {
  std::string label;
  std::size_t dim = 0;
  VectorField rhs;
  double t0 = 0.0;
  double t_end = 1.0;
  State u0;

  State eval(std::span<const double> u) const;
  double window() const { return t_end - t0; }
};

/// FitzHugh-Nagumo:
///   u1' = c (u1 - u1^3/3 + u2),  u2' = -(u1 - a + b u2) / c.
/// Throws ParameterError for c == 0.
OdeSystem make_fhn(double a, double b, double c, State u0, double t0, double t_end);

/// Roessler: u1' = -u2 - u3, u2' = u1 + a u2, u3' = b + u3 (u1 - c).
OdeSystem make_rossler(double a, double b, double c, State u0, double t0, double t_end);

/// Wraps a d-dimensional non-autonomous field into a (d+1)-dimensional
/// autonomous one. Component 0 is the clock (derivative 1), components 1..d
/// evaluate `field` at (state[0], state[1..d]).
class Autonomized {
public:
  Autonomized(TimeDependentField field, std::size_t dim);

  std::size_t dim() const { return dim_ + 1; }
  VectorField rhs() const;

  /// Builds the augmented system; the initial clock value is t0.
  OdeSystem build(std::string label, std::span<const double> u0, double t0,
                  double t_end) const;

private:
  TimeDependentField field_;
  std::size_t dim_;
};

Autonomized autonomize(TimeDependentField field, std::size_t dim);

/// Builds one of the shipped systems by label ("fhn", "rossler").
/// `params` must hold exactly three values.
OdeSystem make_system(const std::string& label, std::span<const double> params,
                      State u0, double t0, double t_end);

/// Standard benchmark parameters (a, b, c) for a shipped system.
std::vector<double> default_parameters(const std::string& label);

void validate(const OdeSystem& system);

} // namespace gparareal
