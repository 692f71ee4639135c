// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "errors.hpp"
#include "normal.hpp"
#include "quadrature.hpp"

namespace penflow {

namespace {

std::string short_number(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", x);
  return buffer;
}

std::string sci(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3e", x);
  return buffer;
}

const char* policy_name(Policy p) { return p == Policy::cm1 ? "cm1" : "cm2"; }

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

SolveResult solve_for(const RunConfig& cfg, Policy policy, double alpha) {
  const PenaltyParams pen{alpha, cfg.penalty.eps_tail};
  if (policy == Policy::cm1) return solve_cm1(cfg.demand, pen, cfg.grid, cfg.bounds, cfg.solver);
  const DemandPath path = study_path(cfg.demand, cfg.grid, cfg.seed, static_cast<std::uint64_t>(cfg.figure_path));
  return solve_cm2(cfg.demand, pen, cfg.grid, cfg.bounds, cfg.update_schedule(), path, cfg.solver);
}

void emit(CommandOutcome& out, const CSVTable& table, const std::filesystem::path& path) {
  write_csv(table, path);
  out.artifacts.push_back(path);
}

long total_count(const MCStudy& s) {
  long n = 0;
  for (int c : s.undersupply_count) n += c;
  return n;
}

// ---- selfcheck ----------------------------------------------------------

CheckResult check_mean_quadrature(const RunConfig& cfg) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double s = cfg.grid.T * i / 99.0;
    const double closed = conditional_mean(cfg.demand, 0.0, cfg.demand.y0, s);
    const double quad = conditional_mean_by_quadrature(cfg.demand, 0.0, cfg.demand.y0, s);
    worst = std::max(worst, std::abs(closed - quad) / std::max(std::abs(quad), 1e-300));
  }
  return {"mean_closed_form_vs_quadrature", worst <= 1e-8, "max_rel_err=" + sci(worst)};
}

CheckResult check_variance_quadrature(const RunConfig& cfg) {
  const OUParams& p = cfg.demand;
  double worst = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double s = cfg.grid.T * i / 100.0;
    const double quad = adaptive_simpson(
        [&](double r) { return p.sigma * p.sigma * std::exp(-2.0 * p.kappa * (s - r)); }, 0.0, s,
        {1e-13, 1'000'000});
    worst = std::max(worst, std::abs(conditional_variance(p, 0.0, s) - quad) / quad);
  }
  return {"variance_closed_form_vs_quadrature", worst <= 1e-8, "max_rel_err=" + sci(worst)};
}

CheckResult check_partial_moment(const RunConfig& cfg) {
  double worst = 0.0;
  for (int i = 0; i <= 48; ++i) {
    const double a = -6.0 + 0.25 * i;
    const GaussianLaw g{cfg.demand.y0, cfg.demand.sigma * cfg.demand.sigma};
    const double sd = g.stddev();
    const double y = g.mean + a * sd;
    const double closed = partial_sq_moment(g, y);
    // Panels of sd/4 keep the adaptive rule from missing the narrow far-tail mass.
    double quad = 0.0;
    for (int panel = 0; panel < 80; ++panel) {
      const double lo = y + 0.25 * sd * panel;
      quad += adaptive_simpson(
          [&](double z) { return (z - y) * (z - y) * normal_pdf((z - g.mean) / sd) / sd; }, lo,
          lo + 0.25 * sd, {1e-15 * closed, 1'000'000});
    }
    worst = std::max(worst, std::abs(closed - quad) / quad);
  }
  return {"partial_moment_vs_quadrature", worst <= 1e-9, "max_rel_err=" + sci(worst)};
}

CheckResult check_delay(const RunConfig& cfg) {
  if (!cfg.grid.exact_shift()) return {"upwind_vs_delay_oracle", true, "skipped: CFL < 1"};
  std::mt19937_64 gen(cfg.seed);
  std::uniform_real_distribution<double> value(-5.0, 5.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ControlSchedule u{0.0, cfg.grid.dt, {}};
    for (int k = 0; k < cfg.grid.control_steps(); ++k) u.values.push_back(value(gen));
    const ScheduleRun run = run_schedule(init_line(cfg.grid), u, cfg.grid.T);
    for (std::size_t k = 0; k < run.times.size(); ++k) {
      if (run.times[k] < 1.0 / cfg.grid.lambda - 1e-12) continue;
      worst = std::max(worst, std::abs(run.outputs[k] - delay_oracle(u, cfg.grid.lambda, run.times[k])));
    }
  }
  return {"upwind_vs_delay_oracle", worst <= 1e-13, "max_abs_err=" + sci(worst)};
}

CheckResult check_gradient(const RunConfig& cfg) {
  std::mt19937_64 gen(cfg.seed + 1);
  std::uniform_real_distribution<double> mean(-3.0, 5.0), sd(0.1, 2.0), a(-6.0, 6.0), alpha(0.0, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const GaussianLaw g{mean(gen), std::pow(sd(gen), 2)};
    const double y = g.mean + a(gen) * g.stddev();
    const PenaltyParams pen{alpha(gen), cfg.penalty.eps_tail};
    const double h = 1e-6 * std::max(1.0, std::abs(y));
    const double fd = (of_pen(g, y + h, pen).total - of_pen(g, y - h, pen).total) / (2.0 * h);
    const double err = std::abs(of_pen_grad(g, y, pen) - fd) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, err);
  }
  return {"gradient_vs_finite_difference", worst <= 1e-6, "max_rel_err=" + sci(worst)};
}

CheckResult check_solvers(const RunConfig& cfg) {
  if (!cfg.grid.exact_shift()) return {"pointwise_vs_descent", true, "skipped: CFL < 1"};
  double worst_u = 0.0;
  double worst_obj = 0.0;
  bool converged = true;
  for (double alpha : {0.0, cfg.penalty.alpha}) {
    const PenaltyParams pen{alpha, cfg.penalty.eps_tail};
    const SolveResult pw = solve_cm1(cfg.demand, pen, cfg.grid, cfg.bounds, SolverKind::pointwise);
    const SolveResult de = solve_cm1(cfg.demand, pen, cfg.grid, cfg.bounds, SolverKind::descent);
    converged = converged && de.diagnostics.converged;
    for (std::size_t k = 0; k < pw.schedule.values.size(); ++k) {
      worst_u = std::max(worst_u, std::abs(pw.schedule.values[k] - de.schedule.values[k]));
    }
    worst_obj = std::max(worst_obj, std::abs(pw.objective_value - de.objective_value) /
                                        std::abs(pw.objective_value));
  }
  return {"pointwise_vs_descent", converged && worst_u <= 1e-6 && worst_obj <= 1e-8,
          "max_control_diff=" + sci(worst_u) + " max_rel_objective_diff=" + sci(worst_obj)};
}

CheckResult check_post_horizon(const RunConfig& cfg) {
  const SolveResult r = solve_cm1(cfg.demand, cfg.penalty, cfg.grid, cfg.bounds, cfg.solver);
  const bool ok = objective_post_horizon_independence_check(r.schedule, 1e6, cm1_law_provider(cfg.demand),
                                                            cfg.penalty, cfg.grid);
  if (!cfg.grid.exact_shift()) {
    return {"post_horizon_inflow_independence", true,
            std::string("skipped: CFL < 1 (") + (ok ? "independent" : "dependent") + ")"};
  }
  return {"post_horizon_inflow_independence", ok, ok ? "independent" : "objective changed"};
}

}  // namespace

std::string run_tag(Policy policy, double alpha, std::uint64_t seed) {
  return std::string(policy_name(policy)) + "_alpha" + short_number(alpha) + "_seed" +
         std::to_string(seed);
}

CSVTable trace_table(const SolveResult& result, std::span<const double> levels) {
  CSVTable table;
  table.schema =
      "trace v1; t=objective node, u=inflow that reaches the outlet at t (applied at t - 1/lambda), "
      "y=output, mean_demand and bands from the demand law the control was optimized against";
  table.header = {"t", "u", "y", "mean_demand"};
  for (double level : levels) {
    table.header.push_back("band_lo_" + short_number(level));
    table.header.push_back("band_hi_" + short_number(level));
  }
  for (std::size_t j = 0; j < result.node_times.size(); ++j) {
    const GaussianLaw& g = result.node_laws[j];
    std::vector<double> row = {result.node_times[j], result.schedule.values[j],
                               result.output_trace[j], g.mean};
    for (double level : levels) {
      const Band band = confidence_band(g, level);
      row.push_back(band.lo);
      row.push_back(band.hi);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CSVTable schedule_table(const SolveResult& result) {
  CSVTable table;
  table.schema = "schedule v1; u is piecewise constant on [t, t + dt)";
  table.header = {"t", "u"};
  const ControlSchedule& u = result.schedule;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    table.rows.push_back({u.t_start + u.dt * static_cast<double>(k), u.values[k]});
  }
  return table;
}

CSVTable undersupply_table(const MCStudy& study) {
  CSVTable table;
  table.schema = "undersupply v1; count of paths with demand > output, mean excess over those paths";
  table.header = {"t", "count", "avg_undersupply"};
  for (std::size_t j = 0; j < study.times.size(); ++j) {
    table.rows.push_back({study.times[j], static_cast<double>(study.undersupply_count[j]),
                          study.avg_undersupply[j]});
  }
  return table;
}

CSVTable ensemble_band_table(const MCStudy& study) {
  CSVTable table;
  table.schema = "ensemble_bands v1; empirical central quantile bands of simulated demand";
  table.header = {"t"};
  for (double level : study.band_levels) {
    table.header.push_back("q_lo_" + short_number(level));
    table.header.push_back("q_hi_" + short_number(level));
  }
  for (std::size_t j = 0; j < study.times.size(); ++j) {
    std::vector<double> row{study.times[j]};
    for (std::size_t l = 0; l < study.band_levels.size(); ++l) {
      row.push_back(study.band_lo[l][j]);
      row.push_back(study.band_hi[l][j]);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CSVTable band_table(const BandTable& bands) {
  CSVTable table;
  table.schema = "bands v1; Gaussian bands conditioned on the realized demand at the latest update time";
  table.header = {"t", "demand", "conditioning_time"};
  for (double level : bands.levels) {
    table.header.push_back("band_lo_" + short_number(level));
    table.header.push_back("band_hi_" + short_number(level));
  }
  for (std::size_t j = 0; j < bands.times.size(); ++j) {
    std::vector<double> row{bands.times[j], bands.realized[j], bands.conditioning_time[j]};
    for (std::size_t l = 0; l < bands.levels.size(); ++l) {
      row.push_back(bands.lo[l][j]);
      row.push_back(bands.hi[l][j]);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<CheckResult> run_selfchecks(const RunConfig& cfg) {
  return {check_mean_quadrature(cfg), check_variance_quadrature(cfg), check_partial_moment(cfg),
          check_delay(cfg),           check_gradient(cfg),            check_solvers(cfg),
          check_post_horizon(cfg)};
}

CommandOutcome run_command(std::string_view command, const RunConfig& cfg,
                           const std::filesystem::path& out_dir) {
  CommandOutcome out;
  std::ostringstream summary;

  if (command == "selfcheck") {
    for (const CheckResult& c : run_selfchecks(cfg)) {
      summary << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
      out.ok = out.ok && c.passed;
    }
    out.summary = summary.str();
    return out;
  }

  if (command == "solve") {
    ensure_directory(out_dir);
    const SolveResult r = solve_for(cfg, cfg.method, cfg.penalty.alpha);
    const std::string tag = run_tag(cfg.method, cfg.penalty.alpha, cfg.seed);
    emit(out, schedule_table(r), out_dir / ("schedule_" + tag + ".csv"));
    emit(out, trace_table(r, cfg.band_levels), out_dir / ("trace_" + tag + ".csv"));
    summary << "method=" << policy_name(cfg.method) << " alpha=" << short_number(cfg.penalty.alpha)
            << " objective=" << format_number(r.objective_value)
            << " iterations=" << r.diagnostics.iterations
            << " projected_gradient=" << sci(r.diagnostics.projected_gradient_norm)
            << " converged=" << (r.diagnostics.converged ? "true" : "false") << "\n";
    if (!r.diagnostics.converged) throw SolverError("solver did not converge");
  } else if (command == "mc") {
    ensure_directory(out_dir);
    const MCStudy study = run_study(cfg.demand, cfg.penalty, cfg.grid, cfg.bounds, cfg.mc_config(cfg.method));
    const std::string tag = run_tag(cfg.method, cfg.penalty.alpha, cfg.seed);
    emit(out, undersupply_table(study), out_dir / ("undersupply_" + tag + ".csv"));
    emit(out, ensemble_band_table(study), out_dir / ("ensemble_bands_" + tag + ".csv"));
    summary << "method=" << policy_name(cfg.method) << " alpha=" << short_number(cfg.penalty.alpha)
            << " paths=" << study.n_paths << " undersupply_cases=" << total_count(study)
            << " mean_realized_loss=" << format_number(study.per_path_objective_mean) << "\n";
  } else if (command == "figures") {
    ensure_directory(out_dir);
    std::vector<MCStudy> cm1_studies, cm2_studies;
    for (double alpha : cfg.figure_alphas) {
      const PenaltyParams pen{alpha, cfg.penalty.eps_tail};
      for (Policy policy : {Policy::cm1, Policy::cm2}) {
        const std::string tag = run_tag(policy, alpha, cfg.seed);
        emit(out, trace_table(solve_for(cfg, policy, alpha), cfg.band_levels),
             out_dir / ("trace_" + tag + ".csv"));
        MCStudy study = run_study(cfg.demand, pen, cfg.grid, cfg.bounds, cfg.mc_config(policy));
        emit(out, undersupply_table(study), out_dir / ("undersupply_" + tag + ".csv"));
        summary << tag << ": undersupply_cases=" << total_count(study)
                << " mean_realized_loss=" << format_number(study.per_path_objective_mean) << "\n";
        (policy == Policy::cm1 ? cm1_studies : cm2_studies).push_back(std::move(study));
      }
    }
    for (std::size_t i = 0; i < cm1_studies.size(); ++i) {
      const PolicyComparison cmp = compare_policies(cm2_studies[i], cm1_studies[i], 0.05);
      summary << "alpha=" << short_number(cfg.figure_alphas[i])
              << ": nodes with avg_undersupply(cm2) <= avg_undersupply(cm1) + 0.05: "
              << format_number(cmp.fraction_avg_le) << "\n";
    }
    const DemandPath path = study_path(cfg.demand, cfg.grid, cfg.seed, static_cast<std::uint64_t>(cfg.figure_path));
    emit(out, band_table(band_data(cfg.demand, path, cfg.update_schedule(), cfg.band_levels)),
         out_dir / ("bands_seed" + std::to_string(cfg.seed) + "_path" + std::to_string(cfg.figure_path) + ".csv"));
  } else {
    throw ValidationError("unknown command '" + std::string(command) +
                          "' (expected solve, mc, figures or selfcheck)");
  }

  for (const auto& p : out.artifacts) summary << "wrote " << p.string() << "\n";
  out.summary = summary.str();
  return out;
}

}  // namespace penflow
