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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gparareal/gparareal.h"

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

constexpr Flag kFlags[] = {
    {"--system", "system", "fhn or rossler"},
    {"--params", "params", "model parameters a,b,c"},
    {"--u0", "u0", "initial value, comma separated"},
    {"--t0", "t0", "start time"},
    {"--tmax", "t_end", "end time"},
    {"--slices", "slices", "number of time slices J"},
    {"--nf", "nf", "total fine steps over the window"},
    {"--ng", "ng", "total coarse steps over the window"},
    {"--fine-order", "fine_order", "fine Runge-Kutta order (1, 2 or 4)"},
    {"--coarse-order", "coarse_order", "coarse Runge-Kutta order (1, 2 or 4)"},
    {"--tol", "tol", "stopping tolerance"},
    {"--workers", "workers", "worker threads"},
    {"--mode", "mode", "fine, parareal or gparareal"},
    {"--legacy-in", "legacy_in", "legacy archive to condition the emulator on"},
    {"--legacy-out", "legacy_out", "write the gathered emulator data here"},
    {"--out-dir", "out_dir", "output directory"},
    {"--grid-min", "grid_min", "sweep grid lower corner"},
    {"--grid-max", "grid_max", "sweep grid upper corner"},
    {"--grid-count", "grid_count", "sweep grid points per dimension"},
};

struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_config_flags(CLI::App* app, ConfigFlags& flags) {
  app->add_option("--config", flags.file, "key = value configuration file");
  for (const auto& f : kFlags)
    flags.options[f.key] = app->add_option(f.name, flags.values[f.key], f.help);
}

int exit_for(gpr_status status) {
  switch (status) {
  case GPR_OK:
    return GPR_EXIT_OK;
  case GPR_ERR_BLOW_UP:
  case GPR_ERR_ILL_CONDITIONED:
    return GPR_EXIT_NOT_CONVERGED;
  default:
    return GPR_EXIT_CONFIG;
  }
}

int report(gpr_status status) {
  std::fprintf(stderr, "error: %s\n", gpr_last_error());
  return exit_for(status);
}

struct ConfigHandle {
  gpr_config* ptr = nullptr;
  ~ConfigHandle() { gpr_config_free(ptr); }
};

// File values first, then command-line overrides.
gpr_status build_config(const ConfigFlags& flags, ConfigHandle& out) {
  if (gpr_status s = gpr_config_new(&out.ptr))
    return s;
  if (!flags.file.empty())
    if (gpr_status s = gpr_config_load_file(out.ptr, flags.file.c_str()))
      return s;
  for (const auto& f : kFlags)
    if (flags.options.at(f.key)->count() > 0)
      if (gpr_status s = gpr_config_set(out.ptr, f.key, flags.values.at(f.key).c_str()))
        return s;
  return gpr_config_validate(out.ptr);
}

void print_line(const char* line, void*) { std::printf("%s\n", line); }

using Command = gpr_status (*)(const gpr_config*, gpr_log_fn, void*, int*);

int run_command(const ConfigFlags& flags, Command cmd) {
  ConfigHandle config;
  if (gpr_status s = build_config(flags, config))
    return report(s);
  int code = 0;
  if (gpr_status s = cmd(config.ptr, print_line, nullptr, &code))
    return report(s);
  return code;
}

int archive_info(const std::string& path) {
  gpr_archive* a = nullptr;
  if (gpr_status s = gpr_archive_open(path.c_str(), &a))
    return report(s);
  size_t need = 0;
  gpr_archive_summary(a, nullptr, 0, &need);
  std::string text(need, '\0');
  gpr_archive_summary(a, text.data(), text.size(), &need);
  std::fputs(text.c_str(), stdout);
  gpr_archive_free(a);
  return 0;
}

int archive_check(const std::string& path, const ConfigFlags& flags) {
  ConfigHandle config;
  if (gpr_status s = build_config(flags, config))
    return report(s);
  gpr_archive* a = nullptr;
  if (gpr_status s = gpr_archive_open(path.c_str(), &a))
    return report(s);
  size_t need = 0;
  gpr_archive_check(a, config.ptr, nullptr, 0, &need);
  std::string text(need, '\0');
  gpr_status s = gpr_archive_check(a, config.ptr, text.data(), text.size(), &need);
  gpr_archive_free(a);
  if (s != GPR_OK)
    return report(s);
  if (need <= 1)
    std::printf("%s: compatible\n", path.c_str());
  else
    for (std::size_t pos = 0, eol; (eol = text.find('\n', pos)) != std::string::npos; pos = eol + 1)
      std::printf("warning: %s\n", text.substr(pos, eol - pos).c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parareal and GP-emulated parareal solvers"};
  app.set_version_flag("--version", std::string(gpr_version()));
  app.require_subcommand(1);

  ConfigFlags solve_flags, sweep_flags, compare_flags, check_flags;
  auto* solve = app.add_subcommand("solve", "solve one initial-value problem");
  add_config_flags(solve, solve_flags);
  auto* sweep = app.add_subcommand("sweep", "iteration counts over a grid of initial values");
  add_config_flags(sweep, sweep_flags);
  auto* compare =
      app.add_subcommand("compare", "errors of both algorithms against the serial fine solve");
  add_config_flags(compare, compare_flags);

  auto* archive = app.add_subcommand("archive", "inspect legacy archives");
  archive->require_subcommand(1);
  std::string info_path, check_path;
  auto* info = archive->add_subcommand("info", "print the header and row counts");
  info->add_option("path", info_path, "archive file")->required();
  auto* check = archive->add_subcommand("check", "compare an archive with a run setup");
  check->add_option("path", check_path, "archive file")->required();
  add_config_flags(check, check_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : GPR_EXIT_CONFIG;
  }

  if (*solve)
    return run_command(solve_flags, gpr_cmd_solve);
  if (*sweep)
    return run_command(sweep_flags, gpr_cmd_sweep);
  if (*compare)
    return run_command(compare_flags, gpr_cmd_compare);
  if (*info)
    return archive_info(info_path);
  if (*check)
    return archive_check(check_path, check_flags);
  return GPR_EXIT_CONFIG;
}
