// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "demand.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "normal.hpp"
#include "quadrature.hpp"

namespace penflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_ordered(double t0, double s, const char* op) {
  if (!(t0 >= 0.0)) {
    throw ValidationError(std::string(op) + ": conditioning time must be >= 0");
  }
  if (!(s >= t0)) {
    throw ValidationError(std::string(op) + ": requires s >= t0");
  }
}

void require_in_domain(const MeanFunction& mu, double t, const char* op) {
  if (mu.is_tabulated() && (t < mu.knots.front().t || t > mu.knots.back().t)) {
    throw ValidationError(std::string(op) + ": time " + std::to_string(t) +
                          " outside the tabulated mean-level range");
  }
}

// kappa * int_{t0}^{s} exp(-kappa (s - r)) mu(r) dr for the closed family.
double closed_form_relaxation(const MeanFunction& mu, double kappa, double t0, double s) {
  const double decay = std::exp(-kappa * (s - t0));
  double total = -mu.constant_offset * std::expm1(-kappa * (s - t0));
  for (const Sinusoid& w : mu.sinusoids) {
    const double omega = kTwoPi * w.frequency;
    const double at_s = kappa * std::sin(omega * s + w.phase) - omega * std::cos(omega * s + w.phase);
    const double at_t0 =
        kappa * std::sin(omega * t0 + w.phase) - omega * std::cos(omega * t0 + w.phase);
    total += w.amplitude * kappa * (at_s - decay * at_t0) / (kappa * kappa + omega * omega);
  }
  return total;
}

double quadrature_relaxation(const MeanFunction& mu, double kappa, double t0, double s) {
  const auto integrand = [&](double r) { return kappa * std::exp(-kappa * (s - r)) * mu(r); };
  // Split at knots so every panel integrates a smooth function.
  std::vector<double> cuts{t0};
  for (const Knot& k : mu.knots) {
    if (k.t > t0 && k.t < s) cuts.push_back(k.t);
  }
  cuts.push_back(s);
  const QuadratureOptions options{1e-10 / static_cast<double>(cuts.size() - 1), 1'000'000};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += adaptive_simpson(integrand, cuts[i], cuts[i + 1], options);
  }
  return total;
}

}  // namespace

MeanFunction MeanFunction::constant(double c) {
  MeanFunction mu;
  mu.constant_offset = c;
  return mu;
}

MeanFunction MeanFunction::tabulated(std::vector<Knot> knots) {
  MeanFunction mu;
  mu.knots = std::move(knots);
  return mu;
}

void MeanFunction::validate(double horizon) const {
  if (!std::isfinite(constant_offset)) throw ValidationError("mu.constant must be finite");
  for (const Sinusoid& w : sinusoids) {
    if (!std::isfinite(w.amplitude) || !std::isfinite(w.frequency) || !std::isfinite(w.phase)) {
      throw ValidationError("mu.sinusoids entries must be finite");
    }
  }
  if (!is_tabulated()) return;
  if (constant_offset != 0.0 || !sinusoids.empty()) {
    throw ValidationError("mu: tabulated knots cannot be combined with constant/sinusoids");
  }
  if (knots.size() < 2) throw ValidationError("mu.knots needs at least two knots");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].t) || !std::isfinite(knots[i].value)) {
      throw ValidationError("mu.knots entries must be finite");
    }
    if (i > 0 && !(knots[i].t > knots[i - 1].t)) {
      throw ValidationError("mu.knots times must be strictly increasing");
    }
  }
  if (knots.front().t > 0.0 || knots.back().t < horizon) {
    throw ValidationError("mu.knots must cover [0, T]");
  }
}

double MeanFunction::operator()(double t) const {
  if (is_tabulated()) {
    require_in_domain(*this, t, "mean level");
    const auto upper = std::upper_bound(knots.begin(), knots.end(), t,
                                        [](double x, const Knot& k) { return x < k.t; });
    if (upper == knots.end()) return knots.back().value;
    const Knot& right = *upper;
    const Knot& left = *(upper - 1);
    const double w = (t - left.t) / (right.t - left.t);
    return left.value + w * (right.value - left.value);
  }
  double value = constant_offset;
  for (const Sinusoid& w : sinusoids) {
    value += w.amplitude * std::sin(kTwoPi * w.frequency * t + w.phase);
  }
  return value;
}

void OUParams::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ValidationError("kappa > 0 violated");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma > 0 violated");
  if (!std::isfinite(y0)) throw ValidationError("y0 must be finite");
}

double GaussianLaw::stddev() const { return std::sqrt(variance); }

double DemandPath::value_at(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
  if (it == times.end() || std::abs(*it - t) > 1e-9) {
    throw ValidationError("demand path has no value at t = " + std::to_string(t));
  }
  return values[static_cast<std::size_t>(it - times.begin())];
}

double conditional_mean(const OUParams& p, double t0, double y_t0, double s) {
  require_ordered(t0, s, "conditional_mean");
  require_in_domain(p.mu, t0, "conditional_mean");
  require_in_domain(p.mu, s, "conditional_mean");
  if (s == t0) return y_t0;
  const double relaxation = p.mu.is_tabulated() ? quadrature_relaxation(p.mu, p.kappa, t0, s)
                                                : closed_form_relaxation(p.mu, p.kappa, t0, s);
  return y_t0 * std::exp(-p.kappa * (s - t0)) + relaxation;
}

double conditional_mean_by_quadrature(const OUParams& p, double t0, double y_t0, double s) {
  require_ordered(t0, s, "conditional_mean");
  require_in_domain(p.mu, t0, "conditional_mean");
  require_in_domain(p.mu, s, "conditional_mean");
  if (s == t0) return y_t0;
  return y_t0 * std::exp(-p.kappa * (s - t0)) + quadrature_relaxation(p.mu, p.kappa, t0, s);
}

double conditional_variance(const OUParams& p, double t0, double s) {
  require_ordered(t0, s, "conditional_variance");
  if (s == t0) return 0.0;
  return -p.sigma * p.sigma * std::expm1(-2.0 * p.kappa * (s - t0)) / (2.0 * p.kappa);
}

GaussianLaw law(const OUParams& p, double t0, double y_t0, double s) {
  return {conditional_mean(p, t0, y_t0, s), conditional_variance(p, t0, s)};
}

double sample_transition(const OUParams& p, double t, double y_t, double dt, RandomStream& rng) {
  if (!(dt > 0.0)) throw ValidationError("sample_transition: dt must be > 0");
  const GaussianLaw next = law(p, t, y_t, t + dt);
  return next.mean + next.stddev() * rng.normal();
}

DemandPath simulate_path(const OUParams& p, std::span<const double> times, double y_start,
                         std::uint64_t seed, std::uint64_t stream) {
  if (times.empty()) throw ValidationError("simulate_path: empty time grid");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw ValidationError("simulate_path: time grid must be strictly increasing");
    }
  }
  DemandPath path;
  path.seed = seed;
  path.stream = stream;
  path.times.assign(times.begin(), times.end());
  path.values.reserve(times.size());
  path.values.push_back(y_start);
  RandomStream rng(seed, stream);
  for (std::size_t i = 1; i < times.size(); ++i) {
    path.values.push_back(
        sample_transition(p, times[i - 1], path.values.back(), times[i] - times[i - 1], rng));
  }
  return path;
}

Band confidence_band(const GaussianLaw& g, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("confidence_band: level must lie in (0, 1)");
  }
  const double half_width = normal_quantile(0.5 * (1.0 + level)) * g.stddev();
  return {g.mean - half_width, g.mean + half_width};
}

Band confidence_band(const OUParams& p, double t0, double y_t0, double s, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("confidence_band: level must lie in (0, 1)");
  }
  return confidence_band(law(p, t0, y_t0, s), level);
}

}  // namespace penflow
