// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

namespace penflow {

struct DescentOptions {
  double pg_tol = 1e-8;  ///< stop when the projected-gradient max-norm falls below this
  int max_iterations = 500;
  int memory = 10;
  double armijo_c = 1e-4;
};

struct DescentResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  double projected_gradient_norm = 0.0;
  bool converged = false;
};

/// Writes the gradient at x into grad and returns the objective value.
using ValueAndGradient = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Box-constrained limited-memory quasi-Newton descent with projection onto
/// [lo, hi] per component and Armijo backtracking (halving) along the
/// projected path.
DescentResult minimize_projected_lbfgs(const ValueAndGradient& f, std::vector<double> x0,
                                       double lo, double hi, const DescentOptions& options = {});

}  // namespace penflow
