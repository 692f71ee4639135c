// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "control.hpp"

namespace penflow {

enum class Policy { cm1, cm2 };

struct MCConfig {
  int n_paths = 1000;
  std::uint64_t seed = 2018;
  Policy policy = Policy::cm1;
  UpdateSchedule schedule;  ///< used by CM2 only
  SolverKind solver = SolverKind::pointwise;
  std::vector<double> band_levels;
  unsigned threads = 0;  ///< 0 picks the hardware concurrency

  void validate(const GridSpec& grid) const;
};

/// Per objective node statistics over the path ensemble.
struct MCStudy {
  int n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<int> undersupply_count;
  std::vector<double> avg_undersupply;
  std::vector<double> band_levels;
  std::vector<std::vector<double>> band_lo;  ///< [level][node], empirical quantiles
  std::vector<std::vector<double>> band_hi;
  /// Mean over paths of dt * sum_k [(Y_k - y_k)^2 + alpha (Y_k - y_k)^2 1{Y_k > y_k}].
  double per_path_objective_mean = 0.0;
};

/// Step grid 0, dt, ..., T.
std::vector<double> path_grid(const GridSpec& grid);

/// Demand path number `index` of a study with the given seed.
DemandPath study_path(const OUParams& p, const GridSpec& grid, std::uint64_t seed,
                      std::uint64_t index);

MCStudy run_study(const OUParams& p, const PenaltyParams& pen, const GridSpec& grid,
                  const Bounds& bounds, const MCConfig& cfg);

struct PolicyComparison {
  std::vector<double> times;
  std::vector<int> count_diff;      ///< a - b
  std::vector<double> avg_diff;     ///< a - b
  double fraction_count_le = 0.0;   ///< nodes with count_a <= count_b
  double fraction_avg_le = 0.0;     ///< nodes with avg_a <= avg_b + tolerance
  double avg_tolerance = 0.0;
};

PolicyComparison compare_policies(const MCStudy& a, const MCStudy& b, double avg_tolerance = 0.0);

/// Confidence bands re-conditioned at each update time on the path's realized value.
struct BandTable {
  std::vector<double> times;
  std::vector<double> realized;
  std::vector<double> conditioning_time;
  std::vector<double> levels;
  std::vector<std::vector<double>> lo;  ///< [level][node]
  std::vector<std::vector<double>> hi;
};

BandTable band_data(const OUParams& p, const DemandPath& path, const UpdateSchedule& sched,
                    std::span<const double> levels);

}  // namespace penflow
