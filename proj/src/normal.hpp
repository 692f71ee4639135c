// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace penflow {

/// Standard Gaussian density.
double normal_pdf(double x);

/// Standard Gaussian CDF, P(Z <= x).
double normal_cdf(double x);

/// Upper tail P(Z > x). Evaluated with erfc directly so that it keeps full
/// relative accuracy for large positive x (no 1 - cdf cancellation).
double normal_ccdf(double x);

/// Inverse of normal_cdf on (0, 1). Rational initial guess followed by one
/// Newton correction; absolute error below 1e-10 on [1e-300, 1 - 1e-16].
double normal_quantile(double p);

}  // namespace penflow
