// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "objective.hpp"
#include "oracles.hpp"

namespace penflow {
namespace {

const GaussianLaw kPaperLaw{2.6355841995385094, (2.0 / 3.0) * (1.0 - std::exp(-1.5))};

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Monte Carlo of E[(Y-y)^2] + alpha E[(Y-y)^2 | Y > y], with a delta-method
// standard error for the ratio.
McEstimate mc_of_pen(const GaussianLaw& law, double y, double alpha, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(law.mean, std::sqrt(law.variance));
  std::vector<double> sq(n), hit(n);
  double sum_sq = 0.0, sum_x = 0.0, sum_i = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = dist(gen) - y;
    sq[i] = d * d;
    hit[i] = d > 0.0 ? 1.0 : 0.0;
    sum_sq += sq[i];
    sum_x += sq[i] * hit[i];
    sum_i += hit[i];
  }
  const double b = sum_i / n;
  const double r = sum_x / sum_i;
  const double value = sum_sq / n + alpha * r;
  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    const double psi = sq[i] + alpha * (sq[i] * hit[i] - r * hit[i]) / b - value;
    var += psi * psi;
  }
  return {value, std::sqrt(var / (n - 1) / n)};
}

TEST(Tracking, Examples) {
  EXPECT_DOUBLE_EQ(tracking_term({1.3, 0.7}, 1.3), 0.7);
  EXPECT_DOUBLE_EQ(tracking_term({0.0, 0.0}, 2.0), 4.0);
  const double closed = tracking_term(kPaperLaw, 2.0);
  EXPECT_NEAR(closed, 0.9219, 1e-4);
  const McEstimate mc = mc_of_pen(kPaperLaw, 2.0, 0.0, 1000000, 11);
  EXPECT_NEAR(closed, mc.value, 3.0 * mc.se);
}

TEST(PartialMoment, Examples) {
  EXPECT_NEAR(partial_sq_moment({0.0, 1.0}, 0.0), 0.5, 1e-15);
  EXPECT_EQ(partial_sq_moment({0.0, 1.0}, 60.0), 0.0);
  // The closed form and quadrature agree on 0.0753398 here.
  EXPECT_NEAR(partial_sq_moment({0.0, 1.0}, 1.0), 0.0753397833437708, 1e-14);
  EXPECT_NEAR(partial_sq_moment({0.0, 1.0}, 1.0), oracle::partial_sq_moment(0.0, 1.0, 1.0), 1e-13);
}

TEST(PartialMoment, MatchesQuadratureAcrossStandardizedLevels) {
  for (double var : {0.04, 1.0, 6.0}) {
    for (double a = -6.0; a <= 6.0; a += 0.75) {
      const double y = 1.5 + a * std::sqrt(var);
      const double closed = partial_sq_moment({1.5, var}, y);
      const double quad = oracle::partial_sq_moment(1.5, var, y);
      EXPECT_NEAR(closed / quad, 1.0, 1e-10) << "a=" << a << " var=" << var;
    }
  }
}

TEST(PartialMoment, DegenerateLaw) {
  EXPECT_DOUBLE_EQ(partial_sq_moment({3.0, 0.0}, 1.0), 4.0);
  EXPECT_EQ(partial_sq_moment({3.0, 0.0}, 4.0), 0.0);
  EXPECT_EQ(exceedance_probability({3.0, 0.0}, 3.0), 0.0);
  EXPECT_EQ(exceedance_probability({3.0, 0.0}, 2.0), 1.0);
}

TEST(Undersupply, Examples) {
  EXPECT_NEAR(undersupply_term({0.0, 1.0}, 0.0, 1e-12), 1.0, 1e-15);
  for (double v : {0.01, 0.5, 9.0}) EXPECT_NEAR(undersupply_term({2.0, v}, 2.0, 1e-12), v, 1e-14 * v);
  const double far = 1.0 + 10.0 * std::sqrt(0.3);
  EXPECT_LT(exceedance_probability({1.0, 0.3}, far), 1e-12);
  EXPECT_EQ(undersupply_term({1.0, 0.3}, far, 1e-12), 0.0);
  // Just inside the cutoff the conditional moment is still finite and positive.
  const double near = 1.0 + 6.0 * std::sqrt(0.3);
  EXPECT_GT(undersupply_term({1.0, 0.3}, near, 1e-12), 0.0);
}

TEST(Undersupply, MatchesQuadratureRatio) {
  for (double a = -5.0; a <= 6.0; a += 0.5) {
    const double y = a * 0.8;
    const double closed = undersupply_term({0.0, 0.64}, y, 1e-12);
    const double quad = oracle::partial_sq_moment(0.0, 0.64, y) / oracle::upper_tail(0.0, 0.64, y);
    EXPECT_NEAR(closed / quad, 1.0, 1e-9) << a;
  }
}

TEST(Undersupply, NonincreasingInOutput) {
  const GaussianLaw l{0.4, 2.0};
  double prev = undersupply_term(l, -8.0, 1e-12);
  for (double y = -7.9; y <= 7.0; y += 0.1) {
    const double cur = undersupply_term(l, y, 1e-12);
    EXPECT_LE(cur, prev + 1e-13) << y;
    prev = cur;
  }
}

TEST(OfPen, Examples) {
  const GaussianLaw l{1.2, 0.8};
  for (double y : {-1.0, 1.2, 3.0}) {
    EXPECT_DOUBLE_EQ(of_pen(l, y, {0.0, 1e-12}).total, tracking_term(l, y));
  }
  for (double alpha : {0.5, 1.0, 3.0}) {
    EXPECT_NEAR(of_pen(l, 1.2, {alpha, 1e-12}).total, 0.8 * (1.0 + alpha), 1e-14);
  }
  const ObjectiveTerm t = of_pen(kPaperLaw, 3.0, {1.0, 1e-12});
  EXPECT_DOUBLE_EQ(t.total, t.tracking + t.penalty);
  const McEstimate mc = mc_of_pen(kPaperLaw, 3.0, 1.0, 1000000, 23);
  EXPECT_NEAR(t.total, mc.value, 3.0 * mc.se);
}

TEST(OfPen, ScaleConsistency) {
  // Y -> m + c (Y - m) and y -> m + c (y - m) scales every term by c^2.
  const GaussianLaw base{0.5, 1.3};
  for (double c : {0.1, 2.0, 7.0}) {
    const GaussianLaw scaled{base.mean, base.variance * c * c};
    for (double y : {-1.0, 0.5, 2.0}) {
      const double ys = base.mean + c * (y - base.mean);
      EXPECT_NEAR(of_pen(scaled, ys, {2.0, 1e-12}).total, c * c * of_pen(base, y, {2.0, 1e-12}).total,
                  1e-12 * c * c);
    }
  }
}

TEST(OfPenGrad, Examples) {
  EXPECT_EQ(of_pen_grad({1.7, 0.3}, 1.7, {0.0, 1e-12}), 0.0);
  for (double v : {0.0, 0.2, 5.0}) EXPECT_DOUBLE_EQ(of_pen_grad({0.0, v}, 1.0, {0.0, 1e-12}), 2.0);
}

TEST(OfPenGrad, MatchesCentralDifferences) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> mean(-3.0, 3.0), var(0.05, 4.0), a(-5.0, 5.0), alpha(0.0, 5.0);
  for (int i = 0; i < 300; ++i) {
    const GaussianLaw l{mean(gen), var(gen)};
    const double y = l.mean + a(gen) * std::sqrt(l.variance);
    const PenaltyParams pen{alpha(gen), 1e-12};
    const double h = 1e-5 * std::max(1.0, std::abs(y));
    const double fd = (of_pen(l, y + h, pen).total - of_pen(l, y - h, pen).total) / (2.0 * h);
    EXPECT_LE(std::abs(of_pen_grad(l, y, pen) - fd) / std::max(1.0, std::abs(fd)), 1e-6) << i;
  }
}

TEST(PenaltyParams, Validation) {
  EXPECT_THROW((PenaltyParams{-1.0, 1e-12}).validate(), ValidationError);
  EXPECT_THROW((PenaltyParams{1.0, 0.0}).validate(), ValidationError);
  EXPECT_NO_THROW((PenaltyParams{3.0, 1e-12}).validate());
}

}  // namespace
}  // namespace penflow
