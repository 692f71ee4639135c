// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace penflow {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  long max_subdivisions = 1'000'000;
};

/// Adaptive Simpson integration of f over [a, b].
///
/// Throws SolverError if the subdivision cap is hit before the tolerance is met.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& options = {});

}  // namespace penflow
