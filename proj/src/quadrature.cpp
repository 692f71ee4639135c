// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "quadrature.hpp"

#include <cmath>

#include "errors.hpp"

namespace penflow {

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  long subdivisions = 0;
  long max_subdivisions;
};

double simpson_recurse(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (++st.subdivisions > st.max_subdivisions) {
    throw SolverError("adaptive_simpson: subdivision cap exceeded");
  }
  // Depth guard: below ~2^-50 relative width the interval is numerically a point.
  if (depth > 50 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& options) {
  if (a == b) return 0.0;
  SimpsonState st{f, 0, options.max_subdivisions};
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(st, a, b, fa, fm, fb, whole, options.abs_tol, 0);
}

}  // namespace penflow
