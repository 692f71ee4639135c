// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "penflow/penflow.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "errors.hpp"

struct pf_config {
  penflow::ParsedConfig parsed;
};

struct pf_solution {
  penflow::SolveResult result;
};

struct pf_study {
  penflow::MCStudy study;
};

namespace {

thread_local std::string last_error;

template <typename Fn>
pf_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    return fn();
  } catch (const penflow::ValidationError& e) {
    last_error = e.what();
    return PF_ERR_VALIDATION;
  } catch (const penflow::IoError& e) {
    last_error = e.what();
    return PF_ERR_IO;
  } catch (const penflow::SolverError& e) {
    last_error = e.what();
    return PF_ERR_SOLVER;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PF_ERR_SOLVER;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PF_ERR_SOLVER;
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool condition, const char* what) {
  if (!condition) throw penflow::ValidationError(what);
}

std::vector<std::string> collect(const char* const* overrides, size_t count) {
  require(count == 0 || overrides != nullptr, "overrides array is null");
  std::vector<std::string> out;
  for (size_t i = 0; i < count; ++i) {
    require(overrides[i] != nullptr, "override entry is null");
    out.emplace_back(overrides[i]);
  }
  return out;
}

template <typename Handle, typename Field, typename Dst>
pf_status copy_out(const Handle* handle, Field field, Dst* out, size_t capacity) {
  return guarded([&] {
    require(handle != nullptr, "null handle");
    const auto values = field(*handle);
    require(out != nullptr || values.empty(), "output buffer is null");
    require(capacity >= values.size(), "output buffer too small");
    std::transform(values.begin(), values.end(), out, [](auto v) { return static_cast<Dst>(v); });
    return PF_OK;
  });
}

penflow::Policy policy_of(pf_method m) {
  require(m == PF_CM1 || m == PF_CM2, "unknown method");
  return m == PF_CM1 ? penflow::Policy::cm1 : penflow::Policy::cm2;
}

}  // namespace

extern "C" {

const char* pf_version(void) { return "0.1.0"; }

const char* pf_last_error(void) { return last_error.c_str(); }

void pf_string_free(char* s) { delete[] s; }

pf_status pf_config_parse(const char* json_text, const char* const* overrides,
                          size_t override_count, pf_config** out) {
  return guarded([&] {
    require(json_text != nullptr && out != nullptr, "null argument");
    const auto ov = collect(overrides, override_count);
    *out = new pf_config{penflow::parse_config(json_text, ov)};
    return PF_OK;
  });
}

pf_status pf_config_load(const char* path, const char* const* overrides, size_t override_count,
                         pf_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    const auto ov = collect(overrides, override_count);
    *out = new pf_config{penflow::load_config(path, ov)};
    return PF_OK;
  });
}

void pf_config_free(pf_config* cfg) { delete cfg; }

pf_status pf_config_to_json(const pf_config* cfg, char** out_json) {
  return guarded([&] {
    require(cfg != nullptr && out_json != nullptr, "null argument");
    *out_json = copy_string(penflow::serialize_config(cfg->parsed.config));
    return PF_OK;
  });
}

pf_status pf_config_provenance(const pf_config* cfg, char** out_json) {
  return guarded([&] {
    require(cfg != nullptr && out_json != nullptr, "null argument");
    *out_json = copy_string(penflow::provenance_json(cfg->parsed.provenance));
    return PF_OK;
  });
}

const char* pf_config_out_dir(const pf_config* cfg) {
  return cfg == nullptr ? "" : cfg->parsed.config.out_dir.c_str();
}

pf_status pf_run_command(const pf_config* cfg, const char* command, const char* out_dir,
                         char** out_summary) {
  return guarded([&] {
    require(cfg != nullptr && command != nullptr, "null argument");
    if (out_summary != nullptr) *out_summary = nullptr;
    const std::string dir = out_dir != nullptr ? out_dir : cfg->parsed.config.out_dir;
    const penflow::CommandOutcome outcome = penflow::run_command(command, cfg->parsed.config, dir);
    if (out_summary != nullptr) *out_summary = copy_string(outcome.summary);
    if (!outcome.ok) {
      last_error = "selfcheck failed";
      return PF_ERR_SOLVER;
    }
    return PF_OK;
  });
}

pf_status pf_demand_law(const pf_config* cfg, double t0, double y_t0, double s, double* out_mean,
                        double* out_variance) {
  return guarded([&] {
    require(cfg != nullptr && out_mean != nullptr && out_variance != nullptr, "null argument");
    const penflow::GaussianLaw g = penflow::law(cfg->parsed.config.demand, t0, y_t0, s);
    *out_mean = g.mean;
    *out_variance = g.variance;
    return PF_OK;
  });
}

pf_status pf_solve(const pf_config* cfg, pf_method method, double alpha, pf_solution** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    const penflow::RunConfig& c = cfg->parsed.config;
    const penflow::PenaltyParams pen{alpha, c.penalty.eps_tail};
    if (policy_of(method) == penflow::Policy::cm1) {
      *out = new pf_solution{penflow::solve_cm1(c.demand, pen, c.grid, c.bounds, c.solver)};
    } else {
      const penflow::DemandPath path =
          penflow::study_path(c.demand, c.grid, c.seed, static_cast<std::uint64_t>(c.figure_path));
      *out = new pf_solution{
          penflow::solve_cm2(c.demand, pen, c.grid, c.bounds, c.update_schedule(), path, c.solver)};
    }
    return PF_OK;
  });
}

void pf_solution_free(pf_solution* sol) { delete sol; }

size_t pf_solution_size(const pf_solution* sol) {
  return sol == nullptr ? 0 : sol->result.node_times.size();
}

double pf_solution_objective(const pf_solution* sol) {
  return sol == nullptr ? 0.0 : sol->result.objective_value;
}

int pf_solution_converged(const pf_solution* sol) {
  return sol != nullptr && sol->result.diagnostics.converged ? 1 : 0;
}

pf_status pf_solution_times(const pf_solution* sol, double* out, size_t capacity) {
  return copy_out(sol, [](const pf_solution& x) { return x.result.node_times; }, out, capacity);
}

pf_status pf_solution_controls(const pf_solution* sol, double* out, size_t capacity) {
  return copy_out(sol, [](const pf_solution& x) { return x.result.schedule.values; }, out, capacity);
}

pf_status pf_solution_outputs(const pf_solution* sol, double* out, size_t capacity) {
  return copy_out(sol, [](const pf_solution& x) { return x.result.output_trace; }, out, capacity);
}

pf_status pf_solution_mean_demand(const pf_solution* sol, double* out, size_t capacity) {
  return copy_out(
      sol,
      [](const pf_solution& x) {
        std::vector<double> means;
        for (const auto& g : x.result.node_laws) means.push_back(g.mean);
        return means;
      },
      out, capacity);
}

pf_status pf_run_study(const pf_config* cfg, pf_method method, double alpha, pf_study** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    const penflow::RunConfig& c = cfg->parsed.config;
    const penflow::PenaltyParams pen{alpha, c.penalty.eps_tail};
    *out = new pf_study{
        penflow::run_study(c.demand, pen, c.grid, c.bounds, c.mc_config(policy_of(method)))};
    return PF_OK;
  });
}

void pf_study_free(pf_study* study) { delete study; }

size_t pf_study_size(const pf_study* study) {
  return study == nullptr ? 0 : study->study.times.size();
}

pf_status pf_study_times(const pf_study* study, double* out, size_t capacity) {
  return copy_out(study, [](const pf_study& x) { return x.study.times; }, out, capacity);
}

pf_status pf_study_counts(const pf_study* study, int32_t* out, size_t capacity) {
  return copy_out(study, [](const pf_study& x) { return x.study.undersupply_count; }, out, capacity);
}

pf_status pf_study_avg_undersupply(const pf_study* study, double* out, size_t capacity) {
  return copy_out(study, [](const pf_study& x) { return x.study.avg_undersupply; }, out, capacity);
}

}  // extern "C"
