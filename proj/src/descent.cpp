// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "descent.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace penflow {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct CurvaturePair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

double projected_gradient_norm(const std::vector<double>& x, const std::vector<double>& g,
                               double lo, double hi) {
  double norm = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    norm = std::max(norm, std::abs(x[i] - std::clamp(x[i] - g[i], lo, hi)));
  }
  return norm;
}

}  // namespace

DescentResult minimize_projected_lbfgs(const ValueAndGradient& f, std::vector<double> x0,
                                       double lo, double hi, const DescentOptions& options) {
  const std::size_t n = x0.size();
  DescentResult result;
  std::vector<double> x = std::move(x0);
  for (double& xi : x) xi = std::clamp(xi, lo, hi);
  std::vector<double> g(n), x_new(n), g_new(n), d(n);
  std::vector<bool> active(n);
  double fx = f(x, g);
  std::deque<CurvaturePair> pairs;

  for (int iteration = 0;; ++iteration) {
    result.iterations = iteration;
    result.projected_gradient_norm = projected_gradient_norm(x, g, lo, hi);
    if (result.projected_gradient_norm <= options.pg_tol) {
      result.converged = true;
      break;
    }
    if (iteration >= options.max_iterations) break;

    for (std::size_t i = 0; i < n; ++i) {
      active[i] = (x[i] <= lo && g[i] > 0.0) || (x[i] >= hi && g[i] < 0.0);
      d[i] = active[i] ? 0.0 : -g[i];
    }

    // Two-loop recursion on the free components.
    std::vector<double> alphas(pairs.size());
    for (std::size_t k = pairs.size(); k-- > 0;) {
      alphas[k] = pairs[k].rho * dot(pairs[k].s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alphas[k] * pairs[k].y[i];
    }
    if (!pairs.empty()) {
      const CurvaturePair& last = pairs.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& di : d) di *= gamma;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const double beta = pairs[k].rho * dot(pairs[k].y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alphas[k] - beta) * pairs[k].s[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i]) d[i] = 0.0;
    }
    if (dot(g, d) >= 0.0) {
      pairs.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = active[i] ? 0.0 : -g[i];
    }

    double t = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    while (t > 1e-20) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = std::clamp(x[i] + t * d[i], lo, hi);
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (x_new[i] - x[i]);
      f_new = f(x_new, g_new);
      if (f_new <= fx + options.armijo_c * decrease) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no further progress is representable

    CurvaturePair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = x_new[i] - x[i];
      pair.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-14 * std::sqrt(dot(pair.s, pair.s) * dot(pair.y, pair.y)) && sy > 0.0) {
      pair.rho = 1.0 / sy;
      pairs.push_back(std::move(pair));
      if (static_cast<int>(pairs.size()) > options.memory) pairs.pop_front();
    }
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
  }

  result.x = std::move(x);
  result.value = fx;
  return result;
}

}  // namespace penflow
