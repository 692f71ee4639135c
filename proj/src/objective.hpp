// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

// Pointwise loss of an output level y against Gaussian demand Y ~ N(m, v):
//
//   tracking    E[(Y - y)^2]                     = (m - y)^2 + v
//   partial     E[(Y - y)^2 1{Y > y}]            = v [(1 + a^2) Q(a) - a phi(a)]
//   undersupply E[(Y - y)^2 | Y > y]             = partial / Q(a)   (0 if Q(a) <= eps)
//   total       tracking + alpha * undersupply
//
// with a = (y - m) / sqrt(v) and Q the upper Gaussian tail.

#pragma once

#include "demand.hpp"

namespace penflow {

struct PenaltyParams {
  double alpha = 0.0;
  /// Exceedance probabilities at or below this count as zero.
  double eps_tail = 1e-12;

  void validate() const;

  bool operator==(const PenaltyParams&) const = default;
};

struct ObjectiveTerm {
  double tracking = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

double tracking_term(const GaussianLaw& law, double y);

/// P(Y > y); the degenerate law gives 1{mean > y}.
double exceedance_probability(const GaussianLaw& law, double y);

double partial_sq_moment(const GaussianLaw& law, double y);

double undersupply_term(const GaussianLaw& law, double y, double eps_tail);

ObjectiveTerm of_pen(const GaussianLaw& law, double y, const PenaltyParams& pen);

/// d/dy of of_pen(...).total. Zero penalty contribution where the tail is cut off.
double of_pen_grad(const GaussianLaw& law, double y, const PenaltyParams& pen);

}  // namespace penflow
