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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace gparareal {

/// Thrown by parallel_map after every task has settled. Carries the lowest
/// failing task index and the original exception.
class TaskFailure : public Error {
public:
  TaskFailure(std::size_t index, std::exception_ptr cause, const std::string& what)
      : Error("task " + std::to_string(index) + " failed: " + what), index_(index),
        cause_(std::move(cause)) {}

  std::size_t index() const noexcept { return index_; }
  [[noreturn]] void rethrow_cause() const { std::rethrow_exception(cause_); }

private:
  std::size_t index_;
  std::exception_ptr cause_;
};

/// Runs task(i) for i in [0, count) on at most `workers` threads and returns
/// the results in index order. The only concurrency entry point of the
/// library; results never depend on `workers`.
template <class Result>
std::vector<Result> parallel_map(std::size_t count, std::size_t workers,
                                 const std::function<Result(std::size_t)>& task) {
  std::vector<std::optional<Result>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};

  auto drain = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        slots[i].emplace(task(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), count);
  if (threads <= 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t)
      pool.emplace_back(drain);
    drain();
  }

  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) {
      std::string what = "unknown error";
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      throw TaskFailure(i, errors[i], what);
    }
  }

  std::vector<Result> out;
  out.reserve(count);
  for (auto& s : slots)
    out.push_back(std::move(*s));
  return out;
}

std::size_t default_workers();

/// Per-slice wallclock costs of the two solvers.
struct CostModel {
  double fine_seconds = 1.0;   // T_F
  double coarse_seconds = 0.0; // T_G
  int slices = 1;              // J
  int iterations = 1;          // k
};

struct PredictedTimes {
  double serial = 0.0;
  double parallel = 0.0;
  double speedup = 0.0;
};

/// T_serial = J T_F, T_para = k T_F + (k+1)(J - k/2) T_G, S = T_serial / T_para.
PredictedTimes predict_times(const CostModel& model);

using Clock = std::chrono::steady_clock;

/// Wallclock breakdown of one run, in seconds.
struct PhaseTimes {
  double coarse = 0.0;
  double fine = 0.0;
  double emulator_condition = 0.0;
  double emulator_optimize = 0.0;
  double overhead = 0.0;
  double total = 0.0;

  double sum() const {
    return coarse + fine + emulator_condition + emulator_optimize + overhead;
  }
};

/// Adds the lifetime of the guard to `sink`.
class ScopedTimer {
public:
  explicit ScopedTimer(double& sink) : sink_(sink), start_(Clock::now()) {}
  ~ScopedTimer() {
    sink_ += std::chrono::duration<double>(Clock::now() - start_).count();
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

private:
  double& sink_;
  Clock::time_point start_;
};

struct ScheduleEvent {
  int iteration = 0;
  int slice = 0;
  std::string phase;
  double start = 0.0; // seconds since the log origin
  double end = 0.0;
};

/// Thread-safe event log for Gantt-style schedule plots.
class ScheduleLog {
public:
  ScheduleLog() : origin_(Clock::now()) {}

  void reset_origin() { origin_ = Clock::now(); }
  double now() const {
    return std::chrono::duration<double>(Clock::now() - origin_).count();
  }
  void record(int iteration, int slice, std::string phase, double start, double end);

  /// Events sorted by (start, iteration, slice).
  std::vector<ScheduleEvent> events() const;
  void write_csv(std::ostream& os) const;

private:
  Clock::time_point origin_;
  mutable std::mutex mutex_;
  std::vector<ScheduleEvent> events_;
};

double median(std::vector<double> values);

} // namespace gparareal
