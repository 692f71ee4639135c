// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

// Ornstein-Uhlenbeck demand with a time-dependent mean level:
//
//   dY_t = kappa (mu(t) - Y_t) dt + sigma dW_t
//
// Given Y_{t0} = y, Y_s is Gaussian. Everything downstream (objective,
// solvers, bands) is computed from that conditional law.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rng.hpp"

namespace penflow {

/// amplitude * sin(2 pi frequency t + phase)
struct Sinusoid {
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;

  bool operator==(const Sinusoid&) const = default;
};

struct Knot {
  double t = 0.0;
  double value = 0.0;

  bool operator==(const Knot&) const = default;
};

/// Mean demand level mu(t).
///
/// Either a constant plus a finite sum of sinusoids (closed-form mean
/// integrals), or, when `knots` is non-empty, the piecewise-linear
/// interpolant of the knots. The two representations are exclusive.
struct MeanFunction {
  double constant_offset = 0.0;
  std::vector<Sinusoid> sinusoids;
  std::vector<Knot> knots;

  static MeanFunction constant(double c);
  static MeanFunction tabulated(std::vector<Knot> knots);

  bool is_tabulated() const { return !knots.empty(); }

  /// Throws ValidationError unless the mean function can be evaluated on [0, horizon].
  void validate(double horizon) const;

  /// Rejects t outside the tabulated range; the closed family is defined everywhere.
  double operator()(double t) const;

  bool operator==(const MeanFunction&) const = default;
};

struct OUParams {
  double kappa = 1.0;
  double sigma = 1.0;
  double y0 = 0.0;
  MeanFunction mu;

  void validate() const;

  bool operator==(const OUParams&) const = default;
};

struct GaussianLaw {
  double mean = 0.0;
  double variance = 0.0;

  double stddev() const;
};

struct DemandPath {
  std::vector<double> times;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Value at a grid time; throws ValidationError if t is not a grid point.
  double value_at(double t) const;
};

/// E[Y_s | Y_t0 = y_t0], closed form for constant-plus-sinusoid mean levels,
/// adaptive quadrature for tabulated ones.
double conditional_mean(const OUParams& p, double t0, double y_t0, double s);

/// Same quantity, always by adaptive quadrature of the mean-level convolution.
double conditional_mean_by_quadrature(const OUParams& p, double t0, double y_t0, double s);

/// Var[Y_s | Y_t0] = sigma^2 (1 - exp(-2 kappa (s - t0))) / (2 kappa).
double conditional_variance(const OUParams& p, double t0, double s);

GaussianLaw law(const OUParams& p, double t0, double y_t0, double s);

/// Exact draw of Y_{t+dt} given Y_t = y_t.
double sample_transition(const OUParams& p, double t, double y_t, double dt, RandomStream& rng);

/// Chains exact transitions along `times`, starting from y_start at times[0].
DemandPath simulate_path(const OUParams& p, std::span<const double> times, double y_start,
                         std::uint64_t seed, std::uint64_t stream = 0);

struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

/// Central Gaussian interval of probability `level` for the law of Y_s given Y_t0.
Band confidence_band(const OUParams& p, double t0, double y_t0, double s, double level);

/// Central interval of probability `level` for an arbitrary Gaussian law.
Band confidence_band(const GaussianLaw& law, double level);

}  // namespace penflow
