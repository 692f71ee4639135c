// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "objective.hpp"

#include <cmath>

#include "errors.hpp"
#include "normal.hpp"

namespace penflow {

namespace {

double sq(double x) { return x * x; }

}  // namespace

void PenaltyParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha >= 0 violated");
  if (!(eps_tail > 0.0) || !(eps_tail < 1.0)) throw ValidationError("eps_tail must lie in (0, 1)");
}

double tracking_term(const GaussianLaw& law, double y) { return sq(law.mean - y) + law.variance; }

double exceedance_probability(const GaussianLaw& law, double y) {
  if (law.variance <= 0.0) return law.mean > y ? 1.0 : 0.0;
  return normal_ccdf((y - law.mean) / law.stddev());
}

double partial_sq_moment(const GaussianLaw& law, double y) {
  if (law.variance <= 0.0) return law.mean > y ? sq(law.mean - y) : 0.0;
  const double a = (y - law.mean) / law.stddev();
  const double tail = normal_ccdf(a);
  const double value = law.variance * ((1.0 + a * a) * tail - a * normal_pdf(a));
  return value > 0.0 ? value : 0.0;
}

double undersupply_term(const GaussianLaw& law, double y, double eps_tail) {
  const double tail = exceedance_probability(law, y);
  if (tail <= eps_tail) return 0.0;
  if (law.variance <= 0.0) return sq(law.mean - y);
  // v * [(1 + a^2) - a m(a)] with the inverse Mills ratio m = phi / Q.
  const double a = (y - law.mean) / law.stddev();
  const double mills = normal_pdf(a) / tail;
  const double value = law.variance * ((1.0 + a * a) - a * mills);
  return value > 0.0 ? value : 0.0;
}

ObjectiveTerm of_pen(const GaussianLaw& law, double y, const PenaltyParams& pen) {
  ObjectiveTerm term;
  term.tracking = tracking_term(law, y);
  term.penalty = undersupply_term(law, y, pen.eps_tail);
  term.total = term.tracking + pen.alpha * term.penalty;
  return term;
}

double of_pen_grad(const GaussianLaw& law, double y, const PenaltyParams& pen) {
  const double tracking = 2.0 * (y - law.mean);
  if (pen.alpha == 0.0) return tracking;
  const double tail = exceedance_probability(law, y);
  if (tail <= pen.eps_tail) return tracking;
  if (law.variance <= 0.0) return tracking + pen.alpha * 2.0 * (y - law.mean);
  // U = v g(a), g = 1 + a^2 - a m, m' = m (m - a)  =>  dU/dy = s (2a - m - a m (m - a)).
  const double s = law.stddev();
  const double a = (y - law.mean) / s;
  const double m = normal_pdf(a) / tail;
  return tracking + pen.alpha * s * (2.0 * a - m - a * m * (m - a));
}

}  // namespace penflow
