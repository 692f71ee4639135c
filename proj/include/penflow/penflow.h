/*
 * Copyright 2026 The penflow Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the penflow inflow-control library.
 *
 * All objects are opaque handles created and released by the library.
 * Every fallible call returns a pf_status; on failure a description is
 * available from pf_last_error() on the calling thread until the next call.
 * Strings returned through char** out-parameters are owned by the caller and
 * must be released with pf_string_free().
 */
#ifndef PENFLOW_PENFLOW_H
#define PENFLOW_PENFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PENFLOW_BUILDING_LIBRARY)
#    define PF_API __declspec(dllexport)
#  else
#    define PF_API __declspec(dllimport)
#  endif
#else
#  define PF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum pf_status {
  PF_OK = 0,
  PF_ERR_VALIDATION = 1,
  PF_ERR_SOLVER = 2,
  PF_ERR_IO = 3
} pf_status;

typedef enum pf_method { PF_CM1 = 0, PF_CM2 = 1 } pf_method;

typedef struct pf_config pf_config;
typedef struct pf_solution pf_solution;
typedef struct pf_study pf_study;

PF_API const char* pf_version(void);

/* Message for the most recent failure on this thread ("" if none). */
PF_API const char* pf_last_error(void);

PF_API void pf_string_free(char* s);

/* ---- configuration ------------------------------------------------------ */

/* overrides: array of "section.key=value" strings, may be NULL when count is 0. */
PF_API pf_status pf_config_parse(const char* json_text, const char* const* overrides,
                                 size_t override_count, pf_config** out);
PF_API pf_status pf_config_load(const char* path, const char* const* overrides,
                                size_t override_count, pf_config** out);
PF_API void pf_config_free(pf_config* cfg);

/* Fully explicit JSON document that parses back to an equal config. */
PF_API pf_status pf_config_to_json(const pf_config* cfg, char** out_json);

/* JSON array of {"key", "value", "default"} for every config field. */
PF_API pf_status pf_config_provenance(const pf_config* cfg, char** out_json);

/* Configured output directory (borrowed, valid while cfg lives). */
PF_API const char* pf_config_out_dir(const pf_config* cfg);

/* ---- commands ----------------------------------------------------------- */

/* command: "solve", "mc", "figures" or "selfcheck". out_dir NULL uses the
 * configured directory. A failed selfcheck returns PF_ERR_SOLVER and still
 * fills *out_summary. */
PF_API pf_status pf_run_command(const pf_config* cfg, const char* command, const char* out_dir,
                                char** out_summary);

/* ---- numerical surface -------------------------------------------------- */

/* Gaussian law of demand at time s given demand y_t0 at time t0. */
PF_API pf_status pf_demand_law(const pf_config* cfg, double t0, double y_t0, double s,
                               double* out_mean, double* out_variance);

/* Optimal control for the configured parameters with penalty alpha. CM2 uses
 * the demand path selected by montecarlo.figure_path. */
PF_API pf_status pf_solve(const pf_config* cfg, pf_method method, double alpha,
                          pf_solution** out);
PF_API void pf_solution_free(pf_solution* sol);
PF_API size_t pf_solution_size(const pf_solution* sol);
PF_API double pf_solution_objective(const pf_solution* sol);
PF_API int pf_solution_converged(const pf_solution* sol);
/* Each copies pf_solution_size() values into the caller's buffer. */
PF_API pf_status pf_solution_times(const pf_solution* sol, double* out, size_t capacity);
PF_API pf_status pf_solution_controls(const pf_solution* sol, double* out, size_t capacity);
PF_API pf_status pf_solution_outputs(const pf_solution* sol, double* out, size_t capacity);
PF_API pf_status pf_solution_mean_demand(const pf_solution* sol, double* out, size_t capacity);

/* Monte Carlo undersupply study with the configured paths and seed. */
PF_API pf_status pf_run_study(const pf_config* cfg, pf_method method, double alpha,
                              pf_study** out);
PF_API void pf_study_free(pf_study* study);
PF_API size_t pf_study_size(const pf_study* study);
PF_API pf_status pf_study_times(const pf_study* study, double* out, size_t capacity);
PF_API pf_status pf_study_counts(const pf_study* study, int32_t* out, size_t capacity);
PF_API pf_status pf_study_avg_undersupply(const pf_study* study, double* out, size_t capacity);

#ifdef __cplusplus
}
#endif

#endif /* PENFLOW_PENFLOW_H */
