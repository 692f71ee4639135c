// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "errors.hpp"
#include "montecarlo.hpp"

namespace penflow {
namespace {

OUParams paper_params() {
  OUParams p;
  p.kappa = 3.0;
  p.sigma = 2.0;
  p.y0 = 1.0;
  p.mu = MeanFunction::constant(2.0);
  p.mu.sinusoids.push_back({3.0, 1.0, 0.0});
  return p;
}

GridSpec paper_grid() { return GridSpec::unit_cfl(0.1, 4.0, 1.0); }

MCConfig config(Policy policy, int n_paths, unsigned threads = 1) {
  MCConfig cfg;
  cfg.n_paths = n_paths;
  cfg.seed = 2018;
  cfg.policy = policy;
  cfg.schedule = UpdateSchedule::uniform(5, paper_grid());
  cfg.band_levels = {0.5, 0.9};
  cfg.threads = threads;
  return cfg;
}

TEST(RunStudy, TrackingControlIsCalibrated) {
  const int n = 2000;
  const MCStudy s = run_study(paper_params(), {0.0, 1e-12}, paper_grid(), {}, config(Policy::cm1, n));
  ASSERT_EQ(s.times.size(), 30u);
  const double se = std::sqrt(0.25 / n);
  for (int c : s.undersupply_count) EXPECT_NEAR(static_cast<double>(c) / n, 0.5, 4.0 * se);
}

TEST(RunStudy, CountsAndHeightsMatchDirectRecount) {
  const GridSpec g = paper_grid();
  const PenaltyParams pen{1.0, 1e-12};
  const int n = 300;
  const MCStudy s = run_study(paper_params(), pen, g, {}, config(Policy::cm1, n));
  const SolveResult r = solve_cm1(paper_params(), pen, g, {});
  std::vector<int> count(30, 0);
  std::vector<double> excess(30, 0.0);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const DemandPath path = study_path(paper_params(), g, 2018, i);
    for (int j = 0; j < 30; ++j) {
      const double d = path.values[10 + j] - r.output_trace[j];
      loss += g.dt * d * d * (d > 0.0 ? 2.0 : 1.0);
      if (d > 0.0) {
        ++count[j];
        excess[j] += d;
      }
    }
  }
  EXPECT_EQ(s.undersupply_count, count);
  for (int j = 0; j < 30; ++j) {
    EXPECT_NEAR(s.avg_undersupply[j], count[j] ? excess[j] / count[j] : 0.0, 1e-12);
    EXPECT_GT(s.avg_undersupply[j], 0.0);
  }
  EXPECT_NEAR(s.per_path_objective_mean, loss / n, 1e-10);
}

TEST(RunStudy, EmpiricalBandsAreOrdered) {
  const MCStudy s = run_study(paper_params(), {1.0, 1e-12}, paper_grid(), {}, config(Policy::cm1, 400));
  ASSERT_EQ(s.band_lo.size(), 2u);
  for (std::size_t j = 0; j < s.times.size(); ++j) {
    EXPECT_LE(s.band_lo[1][j], s.band_lo[0][j]);
    EXPECT_LE(s.band_lo[0][j], s.band_hi[0][j]);
    EXPECT_LE(s.band_hi[0][j], s.band_hi[1][j]);
  }
}

TEST(RunStudy, Cm2WithSingleUpdateEqualsCm1) {
  MCConfig cm2 = config(Policy::cm2, 50);
  cm2.schedule = UpdateSchedule{};
  const MCStudy a = run_study(paper_params(), {1.0, 1e-12}, paper_grid(), {}, config(Policy::cm1, 50));
  const MCStudy b = run_study(paper_params(), {1.0, 1e-12}, paper_grid(), {}, cm2);
  EXPECT_EQ(a.undersupply_count, b.undersupply_count);
  EXPECT_EQ(a.avg_undersupply, b.avg_undersupply);
}

TEST(RunStudy, ThreadCountDoesNotChangeResults) {
  const PenaltyParams pen{3.0, 1e-12};
  const MCStudy one = run_study(paper_params(), pen, paper_grid(), {}, config(Policy::cm2, 60, 1));
  const MCStudy many = run_study(paper_params(), pen, paper_grid(), {}, config(Policy::cm2, 60, 4));
  EXPECT_EQ(one.undersupply_count, many.undersupply_count);
  EXPECT_EQ(one.avg_undersupply, many.avg_undersupply);
  EXPECT_EQ(one.band_lo, many.band_lo);
  EXPECT_EQ(one.per_path_objective_mean, many.per_path_objective_mean);
}

TEST(RunStudy, Validation) {
  MCConfig bad = config(Policy::cm1, 0);
  EXPECT_THROW(run_study(paper_params(), {1.0, 1e-12}, paper_grid(), {}, bad), ValidationError);
  bad = config(Policy::cm1, 10);
  bad.band_levels = {1.0};
  EXPECT_THROW(run_study(paper_params(), {1.0, 1e-12}, paper_grid(), {}, bad), ValidationError);
}

TEST(ComparePolicies, DifferencesAndFractions) {
  MCStudy a, b;
  a.times = b.times = {0.25, 0.5, 0.75, 1.0};
  a.undersupply_count = {1, 5, 3, 0};
  b.undersupply_count = {2, 4, 3, 1};
  a.avg_undersupply = {0.1, 0.5, 0.32, 0.0};
  b.avg_undersupply = {0.2, 0.4, 0.3, 0.1};
  const PolicyComparison c = compare_policies(a, b, 0.05);
  EXPECT_EQ(c.count_diff, (std::vector<int>{-1, 1, 0, -1}));
  EXPECT_DOUBLE_EQ(c.fraction_count_le, 0.75);
  EXPECT_DOUBLE_EQ(c.fraction_avg_le, 0.75);
  EXPECT_NEAR(c.avg_diff[1], 0.1, 1e-15);
  b.times.pop_back();
  EXPECT_THROW(compare_policies(a, b), ValidationError);
}

TEST(BandData, ReconditionsAtUpdateTimes) {
  const GridSpec g = paper_grid();
  const DemandPath path = study_path(paper_params(), g, 2018, 0);
  const auto sched = UpdateSchedule::uniform(5, g);
  const std::vector<double> levels{0.5, 0.99};
  const BandTable t = band_data(paper_params(), path, sched, levels);
  ASSERT_EQ(t.times.size(), 41u);
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    EXPECT_LE(t.lo[1][k], t.lo[0][k]);
    EXPECT_LE(t.hi[0][k], t.hi[1][k]);
    EXPECT_LE(t.conditioning_time[k], t.times[k] + 1e-12);
  }
  // Zero width at each update time, centred on the realized value.
  for (double u : sched.update_times) {
    const int k = g.step_of(u);
    EXPECT_DOUBLE_EQ(t.conditioning_time[k], u);
    EXPECT_EQ(t.lo[1][k], path.values[k]);
    EXPECT_EQ(t.hi[1][k], path.values[k]);
  }
  // After the last update the band keeps widening with horizon.
  EXPECT_GT(t.hi[0][40] - t.lo[0][40], t.hi[0][30] - t.lo[0][30]);
}

}  // namespace
}  // namespace penflow
