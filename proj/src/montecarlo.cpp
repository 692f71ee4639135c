// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "errors.hpp"

namespace penflow {

namespace {

void check_levels(std::span<const double> levels) {
  for (double level : levels) {
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("band levels must lie in (0, 1)");
  }
}

// Linear interpolation between order statistics (R type 7).
double empirical_quantile(std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Runs work(i) for i in [0, n) on up to `threads` workers. Each index is
// handled exactly once; results must be written to index-owned slots.
template <typename Work>
void parallel_for(std::size_t n, unsigned threads, Work&& work) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) work(i);
    });
  }
}

}  // namespace

void MCConfig::validate(const GridSpec& grid) const {
  if (n_paths < 1) throw ValidationError("n_paths >= 1 violated");
  check_levels(band_levels);
  if (policy == Policy::cm2) schedule.validate(grid);
}

std::vector<double> path_grid(const GridSpec& grid) {
  std::vector<double> times;
  for (int k = 0; k <= grid.steps(); ++k) times.push_back(grid.time_of(k));
  return times;
}

DemandPath study_path(const OUParams& p, const GridSpec& grid, std::uint64_t seed,
                      std::uint64_t index) {
  return simulate_path(p, path_grid(grid), p.y0, seed, index);
}

MCStudy run_study(const OUParams& p, const PenaltyParams& pen, const GridSpec& grid,
                  const Bounds& bounds, const MCConfig& cfg) {
  p.validate();
  pen.validate();
  grid.validate();
  bounds.validate();
  cfg.validate(grid);

  SolveResult open_loop;
  if (cfg.policy == Policy::cm1) open_loop = solve_cm1(p, pen, grid, bounds, cfg.solver);

  const int nodes = grid.control_steps();
  const int first_node = grid.transit_steps();
  const auto n = static_cast<std::size_t>(cfg.n_paths);
  // deviation[i][j] = Y_{s_j} - y(s_j) on path i.
  std::vector<std::vector<double>> deviation(n);
  std::vector<std::vector<double>> demand_at_node(n);
  std::vector<std::string> failures(n);

  parallel_for(n, cfg.threads, [&](std::size_t i) {
    try {
      const DemandPath path = study_path(p, grid, cfg.seed, i);
      const std::vector<double>* trace = &open_loop.output_trace;
      SolveResult closed_loop;
      if (cfg.policy == Policy::cm2) {
        closed_loop = solve_cm2(p, pen, grid, bounds, cfg.schedule, path, cfg.solver);
        trace = &closed_loop.output_trace;
      }
      auto& dev = deviation[i];
      auto& dem = demand_at_node[i];
      dev.resize(static_cast<std::size_t>(nodes));
      dem.resize(static_cast<std::size_t>(nodes));
      for (int j = 0; j < nodes; ++j) {
        dem[j] = path.values[static_cast<std::size_t>(first_node + j)];
        dev[j] = dem[j] - (*trace)[static_cast<std::size_t>(j)];
      }
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i].empty()) {
      throw SolverError("Monte Carlo path " + std::to_string(i) + " failed: " + failures[i]);
    }
  }

  MCStudy study;
  study.n_paths = cfg.n_paths;
  study.seed = cfg.seed;
  study.band_levels = cfg.band_levels;
  study.undersupply_count.assign(static_cast<std::size_t>(nodes), 0);
  study.avg_undersupply.assign(static_cast<std::size_t>(nodes), 0.0);
  for (int j = 0; j < nodes; ++j) study.times.push_back(grid.time_of(first_node + j));

  double loss_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double loss = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double d = deviation[i][j];
      loss += d * d;
      if (d > 0.0) {
        loss += pen.alpha * d * d;
        ++study.undersupply_count[j];
        study.avg_undersupply[j] += d;
      }
    }
    loss_sum += grid.dt * loss;
  }
  for (int j = 0; j < nodes; ++j) {
    if (study.undersupply_count[j] > 0) study.avg_undersupply[j] /= study.undersupply_count[j];
  }
  study.per_path_objective_mean = loss_sum / static_cast<double>(n);

  study.band_lo.assign(cfg.band_levels.size(), std::vector<double>(static_cast<std::size_t>(nodes)));
  study.band_hi = study.band_lo;
  std::vector<double> column(n);
  for (int j = 0; j < nodes; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = demand_at_node[i][j];
    std::sort(column.begin(), column.end());
    for (std::size_t l = 0; l < cfg.band_levels.size(); ++l) {
      const double level = cfg.band_levels[l];
      study.band_lo[l][j] = empirical_quantile(column, 0.5 * (1.0 - level));
      study.band_hi[l][j] = empirical_quantile(column, 0.5 * (1.0 + level));
    }
  }
  return study;
}

PolicyComparison compare_policies(const MCStudy& a, const MCStudy& b, double avg_tolerance) {
  if (a.times.size() != b.times.size()) throw ValidationError("compare_policies: grid mismatch");
  for (std::size_t j = 0; j < a.times.size(); ++j) {
    if (std::abs(a.times[j] - b.times[j]) > 1e-12) {
      throw ValidationError("compare_policies: grid mismatch");
    }
  }
  PolicyComparison cmp;
  cmp.times = a.times;
  cmp.avg_tolerance = avg_tolerance;
  std::size_t count_le = 0;
  std::size_t avg_le = 0;
  for (std::size_t j = 0; j < a.times.size(); ++j) {
    cmp.count_diff.push_back(a.undersupply_count[j] - b.undersupply_count[j]);
    cmp.avg_diff.push_back(a.avg_undersupply[j] - b.avg_undersupply[j]);
    if (a.undersupply_count[j] <= b.undersupply_count[j]) ++count_le;
    if (a.avg_undersupply[j] <= b.avg_undersupply[j] + avg_tolerance) ++avg_le;
  }
  if (!a.times.empty()) {
    cmp.fraction_count_le = static_cast<double>(count_le) / static_cast<double>(a.times.size());
    cmp.fraction_avg_le = static_cast<double>(avg_le) / static_cast<double>(a.times.size());
  }
  return cmp;
}

BandTable band_data(const OUParams& p, const DemandPath& path, const UpdateSchedule& sched,
                    std::span<const double> levels) {
  check_levels(levels);
  if (sched.update_times.empty()) throw ValidationError("band_data: empty update schedule");
  BandTable table;
  table.times = path.times;
  table.realized = path.values;
  table.levels.assign(levels.begin(), levels.end());
  table.lo.assign(levels.size(), {});
  table.hi.assign(levels.size(), {});
  std::vector<double> observed;
  for (double t : sched.update_times) observed.push_back(path.value_at(t));

  std::size_t i = 0;
  for (double t : path.times) {
    while (i + 1 < sched.update_times.size() && sched.update_times[i + 1] <= t + 1e-9) ++i;
    const double t0 = std::min(sched.update_times[i], t);
    table.conditioning_time.push_back(t0);
    const GaussianLaw g = law(p, t0, observed[i], std::max(t, t0));
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const Band band = confidence_band(g, levels[l]);
      table.lo[l].push_back(band.lo);
      table.hi[l].push_back(band.hi);
    }
  }
  return table;
}

}  // namespace penflow
