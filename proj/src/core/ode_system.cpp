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

#include "ode_system.hpp"

#include <cmath>

#include "errors.hpp"

namespace gparareal {

State OdeSystem::eval(std::span<const double> u) const {
  if (u.size() != dim)
    throw DimensionMismatch("state has " + std::to_string(u.size()) +
                            " components, system '" + label + "' expects " +
                            std::to_string(dim));
  State du(dim);
  rhs(u, du);
  return du;
}

void validate(const OdeSystem& system) {
  if (system.dim == 0)
    throw ParameterError("system dimension must be positive");
  if (!system.rhs)
    throw ParameterError("system has no vector field");
  if (!(system.t_end > system.t0))
    throw ParameterError("integration window requires t_end > t0");
  if (system.u0.size() != system.dim)
    throw DimensionMismatch("initial value has " + std::to_string(system.u0.size()) +
                            " components, expected " + std::to_string(system.dim));
}

OdeSystem make_fhn(double a, double b, double c, State u0, double t0, double t_end) {
  if (c == 0.0)
    throw ParameterError("FitzHugh-Nagumo parameter c must be non-zero");
  OdeSystem sys;
  sys.label = "fhn";
  sys.dim = 2;
  sys.rhs = [a, b, c](std::span<const double> u, std::span<double> du) {
    du[0] = c * (u[0] - u[0] * u[0] * u[0] / 3.0 + u[1]);
    du[1] = -(u[0] - a + b * u[1]) / c;
  };
  sys.t0 = t0;
  sys.t_end = t_end;
  sys.u0 = std::move(u0);
  validate(sys);
  return sys;
}

OdeSystem make_rossler(double a, double b, double c, State u0, double t0, double t_end) {
  OdeSystem sys;
  sys.label = "rossler";
  sys.dim = 3;
  sys.rhs = [a, b, c](std::span<const double> u, std::span<double> du) {
    du[0] = -u[1] - u[2];
    du[1] = u[0] + a * u[1];
    du[2] = b + u[2] * (u[0] - c);
  };
  sys.t0 = t0;
  sys.t_end = t_end;
  sys.u0 = std::move(u0);
  validate(sys);
  return sys;
}

Autonomized::Autonomized(TimeDependentField field, std::size_t dim)
    : field_(std::move(field)), dim_(dim) {}

VectorField Autonomized::rhs() const {
  return [field = field_, d = dim_](std::span<const double> u, std::span<double> du) {
    du[0] = 1.0;
    field(u[0], u.subspan(1, d), du.subspan(1, d));
  };
}

OdeSystem Autonomized::build(std::string label, std::span<const double> u0, double t0,
                             double t_end) const {
  if (u0.size() != dim_)
    throw DimensionMismatch("initial value has " + std::to_string(u0.size()) +
                            " components, expected " + std::to_string(dim_));
  OdeSystem sys;
  sys.label = std::move(label);
  sys.dim = dim_ + 1;
  sys.rhs = rhs();
  sys.t0 = t0;
  sys.t_end = t_end;
  sys.u0.reserve(dim_ + 1);
  sys.u0.push_back(t0);
  sys.u0.insert(sys.u0.end(), u0.begin(), u0.end());
  validate(sys);
  return sys;
}

Autonomized autonomize(TimeDependentField field, std::size_t dim) {
  return Autonomized(std::move(field), dim);
}

std::vector<double> default_parameters(const std::string& label) {
  if (label == "fhn")
    return {0.2, 0.2, 3.0};
  if (label == "rossler")
    return {0.2, 0.2, 5.7};
  throw ParameterError("unknown system '" + label + "'");
}

OdeSystem make_system(const std::string& label, std::span<const double> params, State u0,
                      double t0, double t_end) {
  if (params.size() != 3)
    throw ParameterError("system '" + label + "' takes 3 parameters, got " +
                         std::to_string(params.size()));
  if (label == "fhn")
    return make_fhn(params[0], params[1], params[2], std::move(u0), t0, t_end);
  if (label == "rossler")
    return make_rossler(params[0], params[1], params[2], std::move(u0), t0, t_end);
  throw ParameterError("unknown system '" + label + "'");
}

} // namespace gparareal
