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

#include "archive.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace gparareal {

namespace {

constexpr const char* kMagic = "gparareal-archive";

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double read_number(const std::string& token, int line) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size())
    throw ArchiveError("archive line " + std::to_string(line) + ": bad number '" + token + "'");
  return v;
}

std::int64_t read_integer(const std::string& token, int line) {
  const double v = read_number(token, line);
  if (v != std::floor(v) || v < 0)
    throw ArchiveError("archive line " + std::to_string(line) + ": expected a count");
  return static_cast<std::int64_t>(v);
}

} // namespace

ArchiveHeader make_header(const ExperimentConfig& c, const std::vector<Hyperparameters>& theta) {
  ArchiveHeader h;
  h.system = c.system;
  h.dim = c.u0.size();
  h.fine_order = c.fine_order;
  h.coarse_order = c.coarse_order;
  h.fine_steps_per_slice = c.nf / c.slices;
  h.coarse_steps_per_slice = c.ng / c.slices;
  h.slice_width = c.mesh().slice_width();
  h.theta = theta;
  return h;
}

std::string archive_serialize(const LegacyArchive& a) {
  const auto& h = a.header;
  if (!a.data.empty() && a.data.dim() != h.dim)
    throw ArchiveError("dataset dimension " + std::to_string(a.data.dim()) +
                       " disagrees with header dimension " + std::to_string(h.dim));
  std::ostringstream os;
  os << kMagic << ' ' << h.version << '\n'
     << "system " << h.system << '\n'
     << "dim " << h.dim << '\n'
     << "fine_order " << h.fine_order << '\n'
     << "coarse_order " << h.coarse_order << '\n'
     << "fine_steps_per_slice " << h.fine_steps_per_slice << '\n'
     << "coarse_steps_per_slice " << h.coarse_steps_per_slice << '\n'
     << "slice_width " << hex(h.slice_width) << '\n'
     << "theta";
  for (const auto& t : h.theta)
    os << ' ' << hex(t.sigma2) << ' ' << hex(t.ell2);
  os << '\n' << "rows " << a.data.size() << '\n' << "end_header\n";
  for (std::size_t r = 0; r < a.data.size(); ++r) {
    for (double v : a.data.input(r))
      os << hex(v) << ' ';
    for (double v : a.data.output(r))
      os << hex(v) << ' ';
    os << to_string(a.data.provenance(r)) << '\n';
  }
  return os.str();
}

void archive_write(const std::string& path, const LegacyArchive& archive) {
  const std::string text = archive_serialize(archive);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ArchiveError("cannot open '" + path + "' for writing");
  out << text;
  if (!out)
    throw ArchiveError("write to '" + path + "' failed");
}

LegacyArchive archive_parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  LegacyArchive a;
  auto& h = a.header;

  auto fail = [&](const std::string& what) {
    throw ArchiveError("archive line " + std::to_string(line_no) + ": " + what);
  };

  if (!std::getline(in, line))
    throw ArchiveError("empty archive");
  ++line_no;
  {
    std::istringstream ls(line);
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != kMagic)
      fail("not a gparareal archive");
    if (version != ArchiveHeader::kVersion)
      fail("unsupported archive version " + std::to_string(version) + " (expected " +
           std::to_string(ArchiveHeader::kVersion) + ")");
    h.version = version;
  }

  std::int64_t rows = -1;
  bool ended = false;
  while (!ended && std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key))
      continue;
    std::vector<std::string> vals;
    for (std::string v; ls >> v;)
      vals.push_back(v);
    auto one = [&]() -> const std::string& {
      if (vals.size() != 1)
        fail("'" + key + "' takes one value");
      return vals[0];
    };
    if (key == "end_header") {
      ended = true;
    } else if (key == "system") {
      h.system = one();
    } else if (key == "dim") {
      h.dim = static_cast<std::size_t>(read_integer(one(), line_no));
    } else if (key == "fine_order") {
      h.fine_order = static_cast<int>(read_integer(one(), line_no));
    } else if (key == "coarse_order") {
      h.coarse_order = static_cast<int>(read_integer(one(), line_no));
    } else if (key == "fine_steps_per_slice") {
      h.fine_steps_per_slice = read_integer(one(), line_no);
    } else if (key == "coarse_steps_per_slice") {
      h.coarse_steps_per_slice = read_integer(one(), line_no);
    } else if (key == "slice_width") {
      h.slice_width = read_number(one(), line_no);
    } else if (key == "theta") {
      if (vals.size() % 2 != 0)
        fail("theta needs (sigma2, ell2) pairs");
      for (std::size_t i = 0; i < vals.size(); i += 2)
        h.theta.push_back({read_number(vals[i], line_no), read_number(vals[i + 1], line_no)});
    } else if (key == "rows") {
      rows = read_integer(one(), line_no);
    } else {
      fail("unknown header key '" + key + "'");
    }
  }
  if (!ended)
    fail("missing end_header");
  if (h.dim == 0)
    fail("header lacks a positive dim");
  if (!h.theta.empty() && h.theta.size() != h.dim)
    fail("theta has " + std::to_string(h.theta.size()) + " pairs for dimension " +
         std::to_string(h.dim));

  a.data = ResidualDataset(h.dim);
  State x(h.dim), y(h.dim);
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string v; ls >> v;)
      tok.push_back(v);
    if (tok.empty())
      continue;
    if (tok.size() != 2 * h.dim + 1)
      fail("row has " + std::to_string(tok.size() - 1) + " numbers, expected " +
           std::to_string(2 * h.dim));
    for (std::size_t i = 0; i < h.dim; ++i) {
      x[i] = read_number(tok[i], line_no);
      y[i] = read_number(tok[h.dim + i], line_no);
    }
    Provenance p;
    if (tok.back() == "acquisition")
      p = Provenance::acquisition;
    else if (tok.back() == "legacy")
      p = Provenance::legacy;
    else
      fail("unknown provenance '" + tok.back() + "'");
    try {
      if (!a.data.add(x, y, p))
        fail("duplicate input row");
    } catch (const ArchiveError&) {
      throw;
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (rows >= 0 && static_cast<std::size_t>(rows) != a.data.size())
    throw ArchiveError("header announces " + std::to_string(rows) + " rows, file holds " +
                       std::to_string(a.data.size()));
  return a;
}

LegacyArchive archive_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ArchiveError("cannot open archive '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return archive_parse(buf.str());
}

std::vector<std::string> check_compatibility(const ArchiveHeader& a, const ArchiveHeader& run) {
  std::vector<std::string> warnings;
  auto note = [&](const std::string& field, const std::string& got, const std::string& want) {
    warnings.push_back("legacy archive " + field + " is " + got + ", this run uses " + want);
  };
  if (a.system != run.system)
    note("system", a.system, run.system);
  if (a.dim != run.dim)
    note("dimension", std::to_string(a.dim), std::to_string(run.dim));
  if (a.fine_order != run.fine_order)
    note("fine order", std::to_string(a.fine_order), std::to_string(run.fine_order));
  if (a.coarse_order != run.coarse_order)
    note("coarse order", std::to_string(a.coarse_order), std::to_string(run.coarse_order));
  if (a.fine_steps_per_slice != run.fine_steps_per_slice)
    note("fine steps per slice", std::to_string(a.fine_steps_per_slice),
         std::to_string(run.fine_steps_per_slice));
  if (a.coarse_steps_per_slice != run.coarse_steps_per_slice)
    note("coarse steps per slice", std::to_string(a.coarse_steps_per_slice),
         std::to_string(run.coarse_steps_per_slice));
  // Slice widths computed from different windows may differ in the last bit.
  if (std::abs(a.slice_width - run.slice_width) >
      1e-12 * std::max(std::abs(a.slice_width), std::abs(run.slice_width)))
    note("slice width", format_double(a.slice_width), format_double(run.slice_width));
  return warnings;
}

} // namespace gparareal
