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

#include "gparareal/gparareal.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "archive.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "harness.hpp"

namespace gp = gparareal;

struct gpr_config {
  std::vector<gp::ConfigEntry> entries;
};

struct gpr_run {
  gp::ExperimentConfig config;
  gp::RunRecord record;
};

struct gpr_archive {
  gp::LegacyArchive archive;
};

namespace {

thread_local std::string g_last_error;

gpr_status fail(gpr_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

gpr_status translate(const std::exception_ptr& ex, const std::string& context = {}) {
  const std::string prefix = context.empty() ? "" : context + ": ";
  try {
    std::rethrow_exception(ex);
  } catch (const gp::TaskFailure& e) {
    try {
      e.rethrow_cause();
    } catch (...) {
      return translate(std::current_exception(), context);
    }
  } catch (const gp::ConfigError& e) {
    return fail(GPR_ERR_CONFIG, prefix + e.what());
  } catch (const gp::ArchiveError& e) {
    return fail(GPR_ERR_ARCHIVE, prefix + e.what());
  } catch (const gp::DimensionMismatch& e) {
    return fail(GPR_ERR_DIMENSION, prefix + e.what());
  } catch (const gp::ParameterError& e) {
    return fail(GPR_ERR_INVALID_ARGUMENT, prefix + e.what());
  } catch (const gp::BlowUp& e) {
    return fail(GPR_ERR_BLOW_UP, prefix + e.what());
  } catch (const gp::IllConditioned& e) {
    return fail(GPR_ERR_ILL_CONDITIONED, prefix + e.what());
  } catch (const gp::Error& e) {
    return fail(GPR_ERR_RUNTIME, prefix + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(GPR_ERR_RUNTIME, prefix + e.what());
  } catch (const std::bad_alloc&) {
    return fail(GPR_ERR_INTERNAL, prefix + "out of memory");
  } catch (const std::exception& e) {
    return fail(GPR_ERR_INTERNAL, prefix + e.what());
  } catch (...) {
  }
  return fail(GPR_ERR_INTERNAL, prefix + "unknown error");
}

// Runs `body`, converting any exception into a status.
template <class Body>
gpr_status guarded(Body&& body) {
  try {
    return body();
  } catch (...) {
    return translate(std::current_exception());
  }
}

gpr_status copy_out(const std::string& text, char* buf, std::size_t size, std::size_t* needed) {
  const std::size_t n = text.size() + 1;
  if (needed)
    *needed = n;
  if (size < n)
    return fail(GPR_ERR_BUFFER_TOO_SMALL,
                "buffer of " + std::to_string(size) + " bytes, need " + std::to_string(n));
  std::memcpy(buf, text.c_str(), n);
  return GPR_OK;
}

gpr_status null_argument(const char* what) {
  return fail(GPR_ERR_INVALID_ARGUMENT, std::string(what) + " must not be NULL");
}

gp::ExperimentConfig resolved(const gpr_config* c) { return gp::resolve(c->entries); }

template <class Cmd>
gpr_status run_command(const gpr_config* config, gpr_log_fn log, void* user, int* exit_code,
                       Cmd cmd) {
  if (!config)
    return null_argument("config");
  return guarded([&] {
    const auto cfg = resolved(config);
    std::ostringstream lines;
    const int code = cmd(cfg, &lines);
    if (log) {
      std::istringstream in(lines.str());
      for (std::string line; std::getline(in, line);)
        log(line.c_str(), user);
    }
    if (exit_code)
      *exit_code = code;
    return GPR_OK;
  });
}

} // namespace

extern "C" {

const char* gpr_version(void) { return "1.0.0"; }

const char* gpr_last_error(void) { return g_last_error.c_str(); }

const char* gpr_status_name(gpr_status status) {
  switch (status) {
  case GPR_OK:
    return "ok";
  case GPR_ERR_INVALID_ARGUMENT:
    return "invalid argument";
  case GPR_ERR_CONFIG:
    return "configuration error";
  case GPR_ERR_ARCHIVE:
    return "archive error";
  case GPR_ERR_DIMENSION:
    return "dimension mismatch";
  case GPR_ERR_BLOW_UP:
    return "blow-up";
  case GPR_ERR_ILL_CONDITIONED:
    return "ill-conditioned emulator";
  case GPR_ERR_RUNTIME:
    return "runtime error";
  case GPR_ERR_BUFFER_TOO_SMALL:
    return "buffer too small";
  case GPR_ERR_INTERNAL:
    return "internal error";
  }
  return "unknown status";
}

gpr_status gpr_config_new(gpr_config** out) {
  if (!out)
    return null_argument("out");
  return guarded([&] {
    *out = new gpr_config;
    return GPR_OK;
  });
}

void gpr_config_free(gpr_config* config) { delete config; }

gpr_status gpr_config_load_string(gpr_config* config, const char* text) {
  if (!config || !text)
    return null_argument(!config ? "config" : "text");
  return guarded([&] {
    auto entries = gp::parse_entries(text);
    config->entries.insert(config->entries.end(), entries.begin(), entries.end());
    return GPR_OK;
  });
}

gpr_status gpr_config_load_file(gpr_config* config, const char* path) {
  if (!config || !path)
    return null_argument(!config ? "config" : "path");
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return fail(GPR_ERR_CONFIG, std::string("cannot open config file '") + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    auto entries = gp::parse_entries(text.str());
    config->entries.insert(config->entries.end(), entries.begin(), entries.end());
    return GPR_OK;
  } catch (...) {
    return translate(std::current_exception(), path);
  }
}

gpr_status gpr_config_set(gpr_config* config, const char* key, const char* value) {
  if (!config || !key || !value)
    return null_argument(!config ? "config" : !key ? "key" : "value");
  const std::string k = gp::canonical_key(key);
  if (!gp::is_known_key(k))
    return fail(GPR_ERR_CONFIG, "'" + std::string(key) + "': unknown key");
  return guarded([&] {
    config->entries.push_back({k, value, 0});
    return GPR_OK;
  });
}

gpr_status gpr_config_validate(const gpr_config* config) {
  if (!config)
    return null_argument("config");
  return guarded([&] {
    resolved(config);
    return GPR_OK;
  });
}

gpr_status gpr_config_render(const gpr_config* config, char* buf, size_t size, size_t* needed) {
  if (!config)
    return null_argument("config");
  return guarded([&] { return copy_out(gp::render_config(resolved(config)), buf, size, needed); });
}

gpr_status gpr_run_new(const gpr_config* config, gpr_run** out) {
  if (!config || !out)
    return null_argument(!config ? "config" : "out");
  return guarded([&] {
    auto run = std::make_unique<gpr_run>();
    run->config = resolved(config);
    run->record = gp::run_experiment(run->config);
    *out = run.release();
    return GPR_OK;
  });
}

void gpr_run_free(gpr_run* run) { delete run; }

int gpr_run_iterations(const gpr_run* run) { return run ? run->record.report.iterations : -1; }

const char* gpr_run_outcome(const gpr_run* run) {
  return run ? gp::to_string(run->record.report.outcome) : "";
}

int gpr_run_succeeded(const gpr_run* run) { return run && run->record.succeeded() ? 1 : 0; }

size_t gpr_run_nodes(const gpr_run* run) { return run ? run->record.table.states.size() : 0; }

size_t gpr_run_dim(const gpr_run* run) { return run ? run->config.u0.size() : 0; }

gpr_status gpr_run_states(const gpr_run* run, double* out, size_t capacity) {
  if (!run || !out)
    return null_argument(!run ? "run" : "out");
  const auto& states = run->record.table.states;
  const std::size_t d = gpr_run_dim(run);
  if (capacity < states.size() * d)
    return fail(GPR_ERR_BUFFER_TOO_SMALL, "need " + std::to_string(states.size() * d) +
                                              " doubles, got " + std::to_string(capacity));
  for (std::size_t j = 0; j < states.size(); ++j)
    std::copy(states[j].begin(), states[j].end(), out + j * d);
  return GPR_OK;
}

size_t gpr_run_dataset_rows(const gpr_run* run) {
  return run ? run->record.acquisition.size() : 0;
}

gpr_status gpr_run_report_json(const gpr_run* run, char* buf, size_t size, size_t* needed) {
  if (!run)
    return null_argument("run");
  return guarded(
      [&] { return copy_out(gp::report_json(run->config, run->record), buf, size, needed); });
}

gpr_status gpr_run_save_archive(const gpr_run* run, const char* path) {
  if (!run || !path)
    return null_argument(!run ? "run" : "path");
  if (run->record.mode != gp::Mode::gparareal)
    return fail(GPR_ERR_INVALID_ARGUMENT, "only gparareal runs gather emulator data");
  return guarded([&] {
    gp::archive_write(path, {gp::make_header(run->config, run->record.theta),
                             run->record.acquisition});
    return GPR_OK;
  });
}

gpr_status gpr_cmd_solve(const gpr_config* config, gpr_log_fn log, void* user, int* exit_code) {
  return run_command(config, log, user, exit_code,
                     [](const gp::ExperimentConfig& c, std::ostream* os) {
                       return gp::cmd_solve(c, os);
                     });
}

gpr_status gpr_cmd_sweep(const gpr_config* config, gpr_log_fn log, void* user, int* exit_code) {
  return run_command(config, log, user, exit_code,
                     [](const gp::ExperimentConfig& c, std::ostream* os) {
                       return gp::cmd_sweep(c, os);
                     });
}

gpr_status gpr_cmd_compare(const gpr_config* config, gpr_log_fn log, void* user,
                           int* exit_code) {
  return run_command(config, log, user, exit_code,
                     [](const gp::ExperimentConfig& c, std::ostream* os) {
                       return gp::cmd_compare(c, os);
                     });
}

gpr_status gpr_archive_open(const char* path, gpr_archive** out) {
  if (!path || !out)
    return null_argument(!path ? "path" : "out");
  return guarded([&] {
    auto a = std::make_unique<gpr_archive>();
    a->archive = gp::archive_read(path);
    *out = a.release();
    return GPR_OK;
  });
}

void gpr_archive_free(gpr_archive* archive) { delete archive; }

size_t gpr_archive_rows(const gpr_archive* archive) {
  return archive ? archive->archive.data.size() : 0;
}

size_t gpr_archive_dim(const gpr_archive* archive) {
  return archive ? archive->archive.header.dim : 0;
}

gpr_status gpr_archive_row(const gpr_archive* archive, size_t row, double* x, double* y,
                           int* is_legacy) {
  if (!archive || !x || !y)
    return null_argument(!archive ? "archive" : !x ? "x" : "y");
  const auto& data = archive->archive.data;
  if (row >= data.size())
    return fail(GPR_ERR_INVALID_ARGUMENT, "row " + std::to_string(row) + " out of range (" +
                                              std::to_string(data.size()) + " rows)");
  std::copy(data.input(row).begin(), data.input(row).end(), x);
  std::copy(data.output(row).begin(), data.output(row).end(), y);
  if (is_legacy)
    *is_legacy = data.provenance(row) == gp::Provenance::legacy;
  return GPR_OK;
}

gpr_status gpr_archive_summary(const gpr_archive* archive, char* buf, size_t size,
                               size_t* needed) {
  if (!archive)
    return null_argument("archive");
  return guarded([&] {
    const auto& h = archive->archive.header;
    const auto& d = archive->archive.data;
    std::ostringstream os;
    os << "version " << h.version << "\n"
       << "system " << h.system << "\n"
       << "dim " << h.dim << "\n"
       << "fine RK" << h.fine_order << ", " << h.fine_steps_per_slice << " steps/slice\n"
       << "coarse RK" << h.coarse_order << ", " << h.coarse_steps_per_slice << " steps/slice\n"
       << "slice width " << gp::format_double(h.slice_width) << "\n"
       << "rows " << d.size() << " (" << d.count(gp::Provenance::acquisition)
       << " acquisition, " << d.count(gp::Provenance::legacy) << " legacy)\n";
    for (std::size_t i = 0; i < h.theta.size(); ++i)
      os << "theta[" << i << "] sigma2 " << gp::format_double(h.theta[i].sigma2) << " ell2 "
         << gp::format_double(h.theta[i].ell2) << "\n";
    return copy_out(os.str(), buf, size, needed);
  });
}

gpr_status gpr_archive_check(const gpr_archive* archive, const gpr_config* config, char* buf,
                             size_t size, size_t* needed) {
  if (!archive || !config)
    return null_argument(!archive ? "archive" : "config");
  return guarded([&] {
    const auto warnings =
        gp::check_compatibility(archive->archive.header, gp::make_header(resolved(config)));
    std::string text;
    for (const auto& w : warnings)
      text += w + "\n";
    return copy_out(text, buf, size, needed);
  });
}

gpr_status gpr_predict_times(double fine_seconds, double coarse_seconds, int slices,
                             int iterations, double* serial, double* parallel, double* speedup) {
  return guarded([&] {
    const auto t = gp::predict_times({fine_seconds, coarse_seconds, slices, iterations});
    if (serial)
      *serial = t.serial;
    if (parallel)
      *parallel = t.parallel;
    if (speedup)
      *speedup = t.speedup;
    return GPR_OK;
  });
}

} // extern "C"
