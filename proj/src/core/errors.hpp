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
#include <stdexcept>
#include <string>

namespace gparareal {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A model parameter outside its admissible domain (e.g. FHN with c = 0).
class ParameterError : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

/// Raised when an integrator produces a non-finite state.
///
/// `step` is the RK step (within the propagation call) that went non-finite.
/// Drivers fill in `slice` and `iteration` as the error travels outwards;
/// -1 means "not known at this level".
class BlowUp : public Error {
public:
  BlowUp(std::int64_t step, int slice = -1, int iteration = -1)
      : Error(describe(step, slice, iteration)), step_(step), slice_(slice),
        iteration_(iteration) {}

  std::int64_t step() const noexcept { return step_; }
  int slice() const noexcept { return slice_; }
  int iteration() const noexcept { return iteration_; }

  BlowUp at(int slice, int iteration) const {
    return BlowUp(step_, slice, iteration);
  }

private:
  static std::string describe(std::int64_t step, int slice, int iteration) {
    std::string msg = "non-finite state at RK step " + std::to_string(step);
    if (slice >= 0)
      msg += ", slice " + std::to_string(slice);
    if (iteration >= 0)
      msg += ", iteration " + std::to_string(iteration);
    return msg;
  }

  std::int64_t step_;
  int slice_;
  int iteration_;
};

/// Gram matrix could not be factorized even at the largest jitter.
class IllConditioned : public Error {
public:
  explicit IllConditioned(int output_dim)
      : Error("Gram matrix for output dimension " + std::to_string(output_dim) +
              " is not positive definite after maximum jitter"),
        output_dim_(output_dim) {}

  int output_dim() const noexcept { return output_dim_; }

private:
  int output_dim_;
};

class ConfigError : public Error {
public:
  ConfigError(std::string field, std::string what, int line = 0)
      : Error(format(field, what, line)), field_(std::move(field)), reason_(std::move(what)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }
  int line() const noexcept { return line_; }

private:
  static std::string format(const std::string& field, const std::string& what,
                            int line) {
    std::string msg;
    if (line > 0)
      msg = "line " + std::to_string(line) + ": ";
    if (!field.empty())
      msg += "'" + field + "': ";
    return msg + what;
  }

  std::string field_;
  std::string reason_;
  int line_;
};

class ArchiveError : public Error {
public:
  using Error::Error;
};

} // namespace gparareal
