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

#include <string>
#include <vector>

#include "config.hpp"
#include "gp_emulator.hpp"

namespace gparareal {

/// Metadata saved alongside legacy rows: enough to tell whether the rows came
/// from the same F/G pair that a later run uses.
struct ArchiveHeader {
  static constexpr int kVersion = 1;

  int version = kVersion;
  std::string system;
  std::size_t dim = 0;
  int fine_order = 0;
  int coarse_order = 0;
  std::int64_t fine_steps_per_slice = 0;
  std::int64_t coarse_steps_per_slice = 0;
  double slice_width = 0.0;
  std::vector<Hyperparameters> theta; // one per output dimension, may be empty

  bool operator==(const ArchiveHeader&) const = default;
};

struct LegacyArchive {
  ArchiveHeader header;
  ResidualDataset data;

  bool operator==(const LegacyArchive&) const = default;
};

ArchiveHeader make_header(const ExperimentConfig& config,
                          const std::vector<Hyperparameters>& theta = {});

/// Text file, numbers in hex-float so reading back is bit-exact.
void archive_write(const std::string& path, const LegacyArchive& archive);
std::string archive_serialize(const LegacyArchive& archive);

/// Throws ArchiveError on an unsupported version, a malformed or duplicate row,
/// or a row whose length disagrees with the header dimension.
LegacyArchive archive_read(const std::string& path);
LegacyArchive archive_parse(const std::string& text);

/// Differences between an archive and the run it is about to seed. Only the
/// window length may differ silently; everything else yields a warning.
std::vector<std::string> check_compatibility(const ArchiveHeader& archive,
                                             const ArchiveHeader& run);

} // namespace gparareal
