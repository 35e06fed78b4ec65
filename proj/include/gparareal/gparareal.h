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

/*
 * C interface to the gparareal toolkit: parareal and GP-emulated parareal
 * solvers for the FitzHugh-Nagumo and Roessler systems.
 *
 * Conventions:
 *   - Every fallible call returns a gpr_status. On failure, gpr_last_error()
 *     describes the problem; the message is per thread and stays valid until
 *     the next failing call on that thread.
 *   - Handles are opaque and freed with the matching *_free (NULL is a no-op).
 *   - String outputs use caller buffers: pass buf/size and receive the needed
 *     size (terminator included) in *needed. A too-small buffer yields
 *     GPR_ERR_BUFFER_TOO_SMALL and leaves buf untouched; buf may be NULL when
 *     size is 0.
 */
#ifndef GPARAREAL_GPARAREAL_H
#define GPARAREAL_GPARAREAL_H

#include <stddef.h>

#if defined(_WIN32)
#define GPR_API __declspec(dllexport)
#else
#define GPR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gpr_status {
  GPR_OK = 0,
  GPR_ERR_INVALID_ARGUMENT = 1, /* NULL handle, bad index, bad parameter */
  GPR_ERR_CONFIG = 2,           /* unknown key, malformed value, failed validation */
  GPR_ERR_ARCHIVE = 3,          /* unreadable or malformed legacy archive */
  GPR_ERR_DIMENSION = 4,
  GPR_ERR_BLOW_UP = 5,          /* non-finite state during integration */
  GPR_ERR_ILL_CONDITIONED = 6,
  GPR_ERR_RUNTIME = 7,          /* I/O and other run-time failures */
  GPR_ERR_BUFFER_TOO_SMALL = 8,
  GPR_ERR_INTERNAL = 9
} gpr_status;

/* Command exit codes, as returned through gpr_cmd_* and used by the CLI. */
#define GPR_EXIT_OK 0
#define GPR_EXIT_CONFIG 1
#define GPR_EXIT_NOT_CONVERGED 2

typedef struct gpr_config gpr_config;
typedef struct gpr_run gpr_run;
typedef struct gpr_archive gpr_archive;

/* Receives one human-readable progress line per call. */
typedef void (*gpr_log_fn)(const char* line, void* user);

GPR_API const char* gpr_version(void);
GPR_API const char* gpr_last_error(void);
GPR_API const char* gpr_status_name(gpr_status status);

/* ---- configuration -------------------------------------------------------
 * A config is a list of key/value assignments applied on top of the defaults
 * of the selected system (the last "system" assignment wins). Later
 * assignments override earlier ones, so load the file first and then apply
 * command-line overrides with gpr_config_set.
 *
 * Keys: system, params, u0, t0, t_end (alias tmax), slices, nf, ng,
 * fine_order, coarse_order, tol, workers, mode, legacy_in, legacy_out,
 * out_dir, grid_min, grid_max, grid_count. Vectors are comma separated.
 */
GPR_API gpr_status gpr_config_new(gpr_config** out);
GPR_API void gpr_config_free(gpr_config* config);
GPR_API gpr_status gpr_config_load_file(gpr_config* config, const char* path);
GPR_API gpr_status gpr_config_load_string(gpr_config* config, const char* text);
GPR_API gpr_status gpr_config_set(gpr_config* config, const char* key, const char* value);
GPR_API gpr_status gpr_config_validate(const gpr_config* config);
/* Every resolved field in file syntax; loading the output reproduces it. */
GPR_API gpr_status gpr_config_render(const gpr_config* config, char* buf, size_t size,
                                     size_t* needed);

/* ---- single runs ---------------------------------------------------------
 * Runs the configured mode (fine, parareal or gparareal). A run that blows up
 * or fails to converge still yields a handle; inspect gpr_run_outcome.
 */
GPR_API gpr_status gpr_run_new(const gpr_config* config, gpr_run** out);
GPR_API void gpr_run_free(gpr_run* run);
GPR_API int gpr_run_iterations(const gpr_run* run);
/* "converged", "exhausted", "blow_up", "ill_conditioned" or "iteration_limit". */
GPR_API const char* gpr_run_outcome(const gpr_run* run);
/* 1 when the run converged or exhausted all slices. */
GPR_API int gpr_run_succeeded(const gpr_run* run);
GPR_API size_t gpr_run_nodes(const gpr_run* run);
GPR_API size_t gpr_run_dim(const gpr_run* run);
/* Row-major nodes x dim table into out[0 .. capacity). */
GPR_API gpr_status gpr_run_states(const gpr_run* run, double* out, size_t capacity);
GPR_API size_t gpr_run_dataset_rows(const gpr_run* run);
GPR_API gpr_status gpr_run_report_json(const gpr_run* run, char* buf, size_t size,
                                       size_t* needed);
/* Saves the acquisition rows and final hyperparameters (gparareal runs only). */
GPR_API gpr_status gpr_run_save_archive(const gpr_run* run, const char* path);

/* ---- commands --------------------------------------------------------------
 * File-producing drivers behind the CLI. *exit_code receives GPR_EXIT_OK or
 * GPR_EXIT_NOT_CONVERGED when the call itself succeeds. `log` may be NULL.
 */
GPR_API gpr_status gpr_cmd_solve(const gpr_config* config, gpr_log_fn log, void* user,
                                 int* exit_code);
GPR_API gpr_status gpr_cmd_sweep(const gpr_config* config, gpr_log_fn log, void* user,
                                 int* exit_code);
GPR_API gpr_status gpr_cmd_compare(const gpr_config* config, gpr_log_fn log, void* user,
                                   int* exit_code);

/* ---- legacy archives ---------------------------------------------------- */
GPR_API gpr_status gpr_archive_open(const char* path, gpr_archive** out);
GPR_API void gpr_archive_free(gpr_archive* archive);
GPR_API size_t gpr_archive_rows(const gpr_archive* archive);
GPR_API size_t gpr_archive_dim(const gpr_archive* archive);
/* x and y receive dim values each; *is_legacy may be NULL. */
GPR_API gpr_status gpr_archive_row(const gpr_archive* archive, size_t row, double* x,
                                   double* y, int* is_legacy);
GPR_API gpr_status gpr_archive_summary(const gpr_archive* archive, char* buf, size_t size,
                                       size_t* needed);
/* Newline-separated compatibility warnings against config; empty when none. */
GPR_API gpr_status gpr_archive_check(const gpr_archive* archive, const gpr_config* config,
                                     char* buf, size_t size, size_t* needed);

/* ---- cost model ----------------------------------------------------------
 * T_serial = J T_F, T_para = k T_F + (k + 1)(J - k/2) T_G, S = T_serial / T_para.
 */
GPR_API gpr_status gpr_predict_times(double fine_seconds, double coarse_seconds, int slices,
                                     int iterations, double* serial, double* parallel,
                                     double* speedup);

#ifdef __cplusplus
}
#endif

#endif /* GPARAREAL_GPARAREAL_H */
