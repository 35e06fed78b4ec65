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

#include "runtime.hpp"

#include <iomanip>
#include <limits>

namespace gparareal {

std::size_t default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

PredictedTimes predict_times(const CostModel& model) {
  if (!(model.fine_seconds > 0.0) || model.coarse_seconds < 0.0)
    throw ParameterError("cost model needs T_F > 0 and T_G >= 0");
  if (model.slices <= 0 || model.iterations <= 0)
    throw ParameterError("cost model needs J > 0 and k > 0");
  const double J = model.slices;
  const double k = model.iterations;
  PredictedTimes t;
  t.serial = J * model.fine_seconds;
  t.parallel = k * model.fine_seconds + (k + 1.0) * (J - k / 2.0) * model.coarse_seconds;
  t.speedup = t.serial / t.parallel;
  return t;
}

void ScheduleLog::record(int iteration, int slice, std::string phase, double start,
                         double end) {
  std::lock_guard lock(mutex_);
  events_.push_back({iteration, slice, std::move(phase), start, end});
}

std::vector<ScheduleEvent> ScheduleLog::events() const {
  std::vector<ScheduleEvent> out;
  {
    std::lock_guard lock(mutex_);
    out = events_;
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.start != b.start)
      return a.start < b.start;
    if (a.iteration != b.iteration)
      return a.iteration < b.iteration;
    return a.slice < b.slice;
  });
  return out;
}

void ScheduleLog::write_csv(std::ostream& os) const {
  os << "iteration,slice,phase,start,end\n";
  const auto flags = os.flags();
  os << std::setprecision(9);
  for (const auto& e : events())
    os << e.iteration << ',' << e.slice << ',' << e.phase << ',' << e.start << ','
       << e.end << '\n';
  os.flags(flags);
}

double median(std::vector<double> values) {
  if (values.empty())
    return std::numeric_limits<double>::quiet_NaN();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1)
    return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(values.begin(), mid);
  return 0.5 * (lo + hi);
}

} // namespace gparareal
