// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace penflow {

namespace {

void check_subproblem(const Subproblem& sub) {
  const GridSpec& grid = sub.initial.grid;
  if (sub.initial.step_index != sub.first_step) {
    throw ValidationError("subproblem: line state time differs from the first control step");
  }
  if (sub.length <= 0 || sub.first_step < 0 || sub.first_step + sub.length > grid.control_steps()) {
    throw ValidationError("subproblem: control window outside the control horizon");
  }
}

double node_time(const Subproblem& sub, int j) {
  const GridSpec& grid = sub.initial.grid;
  return grid.time_of(sub.first_step + grid.transit_steps() + j);
}

SolveResult finish(ControlSchedule schedule, const LawProvider& laws, const PenaltyParams& pen,
                   const LineState& initial, SolverDiagnostics diagnostics) {
  ObjectiveEvaluation eval = evaluate_objective(schedule, laws, pen, initial);
  SolveResult result;
  result.schedule = std::move(schedule);
  result.node_times = std::move(eval.node_times);
  result.output_trace = std::move(eval.outputs);
  result.node_laws = std::move(eval.laws);
  result.objective_value = eval.value;
  result.diagnostics = diagnostics;
  return result;
}

}  // namespace

void Horizon::validate() const {
  if (!(lambda > 0.0)) throw ValidationError("lambda > 0 violated");
  if (!(T > transit_time())) {
    throw ValidationError("horizon shorter than transit time (T must exceed 1/lambda)");
  }
}

Horizon horizon_of(const GridSpec& grid) { return {grid.T, grid.lambda}; }

UpdateSchedule UpdateSchedule::uniform(int n, const GridSpec& grid) {
  if (n < 1) throw ValidationError("number of updates must be >= 1");
  const int steps = grid.control_steps();
  if (steps % n != 0) {
    throw ValidationError("control horizon of " + std::to_string(steps) +
                          " steps does not split into " + std::to_string(n) + " equal updates");
  }
  UpdateSchedule sched;
  sched.update_times.clear();
  for (int i = 0; i < n; ++i) sched.update_times.push_back(grid.time_of(i * (steps / n)));
  return sched;
}

void UpdateSchedule::validate(const GridSpec& grid) const {
  if (update_times.empty() || update_times.front() != 0.0) {
    throw ValidationError("update_times must start at 0");
  }
  int previous = -1;
  for (double t : update_times) {
    const int k = grid.step_of(t);
    if (k <= previous) throw ValidationError("update_times must be strictly increasing");
    if (k >= grid.control_steps()) {
      throw ValidationError("update_times must lie before T - 1/lambda");
    }
    previous = k;
  }
}

void Bounds::validate() const {
  if (std::isnan(u_min) || std::isnan(u_max) || !(u_min <= u_max)) {
    throw ValidationError("bounds: u_min <= u_max violated");
  }
}

Subproblem full_horizon(const GridSpec& grid) { return {init_line(grid), 0, grid.control_steps()}; }

ObjectiveEvaluation evaluate_objective(const ControlSchedule& u, const LawProvider& laws,
                                       const PenaltyParams& pen, const LineState& z_init) {
  const GridSpec& grid = z_init.grid;
  const int k0 = z_init.step_index;
  if (u.values.empty()) throw ValidationError("objective: empty control schedule");
  if (grid.step_of(u.t_start) != k0) {
    throw ValidationError("objective: schedule does not start at the line state's time");
  }
  const int scored = std::min(k0 + static_cast<int>(u.values.size()), grid.control_steps()) - k0;
  ObjectiveEvaluation eval;
  if (scored <= 0) return eval;

  const int first_node = k0 + grid.transit_steps();
  const int last_node = first_node + scored - 1;
  // A window shorter than the remaining horizon holds its last value onward.
  ControlSchedule held = u;
  const int needed = std::min(last_node, grid.control_steps()) - k0;
  if (static_cast<int>(held.values.size()) < needed) {
    held.values.resize(static_cast<std::size_t>(needed), u.values.back());
  }
  const ScheduleRun run = run_schedule(z_init, held, grid.time_of(last_node));
  eval.node_times.reserve(static_cast<std::size_t>(scored));
  eval.outputs.reserve(static_cast<std::size_t>(scored));
  eval.laws.reserve(static_cast<std::size_t>(scored));
  for (int j = 0; j < scored; ++j) {
    const int k = first_node + j;
    const double s = grid.time_of(k);
    const double y = run.outputs[static_cast<std::size_t>(k - k0 - 1)];
    const GaussianLaw g = laws(s);
    eval.value += grid.dt * of_pen(g, y, pen).total;
    eval.node_times.push_back(s);
    eval.outputs.push_back(y);
    eval.laws.push_back(g);
  }
  return eval;
}

double objective_functional(const ControlSchedule& u, const LawProvider& laws,
                            const PenaltyParams& pen, const LineState& z_init) {
  return evaluate_objective(u, laws, pen, z_init).value;
}

double minimize_node(const GaussianLaw& law, const PenaltyParams& pen, const Bounds& bounds) {
  const auto slope = [&](double y) { return of_pen_grad(law, y, pen); };
  // With alpha >= 0 the unconstrained minimizer is never below the mean.
  double lo = std::isfinite(bounds.u_min) ? bounds.u_min : law.mean - 1.0;
  if (slope(lo) >= 0.0) return lo;
  if (std::isfinite(bounds.u_max) && slope(bounds.u_max) <= 0.0) return bounds.u_max;

  const double base = std::max(lo, law.mean);
  double reach = std::max(1.0, 4.0 * law.stddev());
  double hi = std::min(base + reach, bounds.u_max);
  while (slope(hi) <= 0.0) {
    lo = hi;
    reach *= 2.0;
    hi = std::min(base + reach, bounds.u_max);
    if (reach > 1e12) throw SolverError("minimize_node: could not bracket the minimizer");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

SolveResult solve_pointwise(const LawProvider& laws, const PenaltyParams& pen,
                            const Bounds& bounds, const Subproblem& sub) {
  const GridSpec& grid = sub.initial.grid;
  if (!grid.exact_shift()) {
    throw SolverError("solve_pointwise requires CFL number 1 (exact delay map); use descent");
  }
  check_subproblem(sub);
  ControlSchedule schedule{grid.time_of(sub.first_step), grid.dt, {}};
  schedule.values.reserve(static_cast<std::size_t>(sub.length));
  SolverDiagnostics diag;
  for (int j = 0; j < sub.length; ++j) {
    const GaussianLaw g = laws(node_time(sub, j));
    const double y = minimize_node(g, pen, bounds);
    schedule.values.push_back(y);
    const double grad = grid.dt * of_pen_grad(g, y, pen);
    diag.projected_gradient_norm = std::max(
        diag.projected_gradient_norm, std::abs(y - std::clamp(y - grad, bounds.u_min, bounds.u_max)));
  }
  diag.iterations = sub.length;
  diag.converged = true;
  return finish(std::move(schedule), laws, pen, sub.initial, diag);
}

SolveResult solve_descent(const LawProvider& laws, const PenaltyParams& pen, const Bounds& bounds,
                          const Subproblem& sub, const ControlSchedule& u0,
                          const DescentOptions& options) {
  const GridSpec& grid = sub.initial.grid;
  check_subproblem(sub);
  const double t_start = grid.time_of(sub.first_step);
  if (static_cast<int>(u0.values.size()) != sub.length ||
      std::abs(u0.t_start - t_start) > 1e-12 || std::abs(u0.dt - grid.dt) > 1e-15) {
    throw ValidationError("solve_descent: initial control not aligned with the subproblem");
  }

  const int k0 = sub.first_step;
  const int first_node = k0 + grid.transit_steps();
  const int last_node = first_node + sub.length - 1;
  const double c = grid.exact_shift() ? 1.0 : grid.cfl();
  std::vector<GaussianLaw> node_laws;
  for (int j = 0; j < sub.length; ++j) node_laws.push_back(laws(node_time(sub, j)));

  const auto value_and_grad = [&](std::span<const double> x, std::span<double> grad) {
    ControlSchedule u{t_start, grid.dt, {x.begin(), x.end()}};
    const int needed = std::min(last_node, grid.control_steps()) - k0;
    if (static_cast<int>(u.values.size()) < needed) {
      u.values.resize(static_cast<std::size_t>(needed), x.back());
    }
    const ScheduleRun run = run_schedule(sub.initial, u, grid.time_of(last_node));
    double value = 0.0;
    std::vector<double> weight(static_cast<std::size_t>(sub.length));
    for (int j = 0; j < sub.length; ++j) {
      const double y = run.outputs[static_cast<std::size_t>(first_node + j - k0 - 1)];
      value += grid.dt * of_pen(node_laws[j], y, pen).total;
      weight[j] = grid.dt * of_pen_grad(node_laws[j], y, pen);
    }
    // Adjoint sweep of z^n = (1 - c) z^{n-1} + c shift(z^{n-1}) with inflow u_{n-1}.
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> adj(sub.initial.z.size(), 0.0);
    const std::size_t last = adj.size() - 1;
    for (int n = last_node; n > k0; --n) {
      if (n >= first_node) adj[last] += weight[static_cast<std::size_t>(n - first_node)];
      const int control = std::min(n - 1 - k0, sub.length - 1);
      grad[static_cast<std::size_t>(control)] += c * adj[0];
      for (std::size_t j = 0; j < last; ++j) adj[j] = (1.0 - c) * adj[j] + c * adj[j + 1];
      adj[last] *= (1.0 - c);
    }
    return value;
  };

  const DescentResult dr = minimize_projected_lbfgs(value_and_grad, u0.values, bounds.u_min,
                                                    bounds.u_max, options);
  SolverDiagnostics diag{dr.iterations, dr.projected_gradient_norm, dr.converged};
  return finish(ControlSchedule{t_start, grid.dt, dr.x}, laws, pen, sub.initial, diag);
}

LawProvider cm1_law_provider(const OUParams& p) {
  return [p](double s) { return law(p, 0.0, p.y0, s); };
}

LawProvider cm2_law_provider(const OUParams& p, const GridSpec& grid, const UpdateSchedule& sched,
                             const DemandPath& path) {
  std::vector<double> starts;
  std::vector<double> observed;
  for (double t : sched.update_times) {
    starts.push_back(t);
    observed.push_back(path.value_at(t));
  }
  const double transit = 1.0 / grid.lambda;
  return [p, starts, observed, transit](double s) {
    std::size_t i = 0;
    while (i + 1 < starts.size() && starts[i + 1] + transit <= s + 1e-9) ++i;
    return law(p, starts[i], observed[i], s);
  };
}

namespace {

SolveResult solve_window(const LawProvider& laws, const PenaltyParams& pen, const Bounds& bounds,
                         const Subproblem& sub, SolverKind solver) {
  if (solver == SolverKind::pointwise) return solve_pointwise(laws, pen, bounds, sub);
  const GridSpec& grid = sub.initial.grid;
  ControlSchedule u0{grid.time_of(sub.first_step), grid.dt, {}};
  for (int j = 0; j < sub.length; ++j) {
    u0.values.push_back(std::clamp(laws(node_time(sub, j)).mean, bounds.u_min, bounds.u_max));
  }
  return solve_descent(laws, pen, bounds, sub, u0);
}

}  // namespace

SolveResult solve_cm1(const OUParams& p, const PenaltyParams& pen, const GridSpec& grid,
                      const Bounds& bounds, SolverKind solver) {
  p.validate();
  pen.validate();
  bounds.validate();
  grid.validate();
  return solve_window(cm1_law_provider(p), pen, bounds, full_horizon(grid), solver);
}

SolveResult solve_cm2(const OUParams& p, const PenaltyParams& pen, const GridSpec& grid,
                      const Bounds& bounds, const UpdateSchedule& sched, const DemandPath& path,
                      SolverKind solver) {
  p.validate();
  pen.validate();
  bounds.validate();
  grid.validate();
  sched.validate(grid);

  LineState state = init_line(grid);
  ControlSchedule combined{0.0, grid.dt, {}};
  SolverDiagnostics diag{0, 0.0, true};
  const auto& times = sched.update_times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t_update = times[i];
    const double observed = path.value_at(t_update);
    const int k_begin = grid.step_of(t_update);
    const int k_end = i + 1 < times.size() ? grid.step_of(times[i + 1]) : grid.control_steps();
    const LawProvider laws = [&p, t_update, observed](double s) {
      return law(p, t_update, observed, s);
    };
    const SolveResult part =
        solve_window(laws, pen, bounds, Subproblem{state, k_begin, k_end - k_begin}, solver);
    combined.values.insert(combined.values.end(), part.schedule.values.begin(),
                           part.schedule.values.end());
    diag.iterations += part.diagnostics.iterations;
    diag.projected_gradient_norm =
        std::max(diag.projected_gradient_norm, part.diagnostics.projected_gradient_norm);
    diag.converged = diag.converged && part.diagnostics.converged;
    state = run_schedule(std::move(state), part.schedule, grid.time_of(k_end)).state;
  }
  return finish(std::move(combined), cm2_law_provider(p, grid, sched, path), pen, init_line(grid),
                diag);
}

bool objective_post_horizon_independence_check(const ControlSchedule& u, double tail_value,
                                               const LawProvider& laws, const PenaltyParams& pen,
                                               const GridSpec& grid,
                                               std::optional<double> tail_from) {
  const LineState start = init_line(grid);
  const int k0 = grid.step_of(u.t_start);
  const int k_tail = grid.step_of(tail_from.value_or(horizon_of(grid).control_end()));
  if (k0 != 0) throw ValidationError("independence check expects a schedule starting at t = 0");
  if (u.values.empty()) throw ValidationError("independence check: empty schedule");

  ControlSchedule modified{u.t_start, u.dt, {}};
  for (int k = 0; k < grid.steps(); ++k) {
    if (k >= k_tail) {
      modified.values.push_back(tail_value);
    } else {
      modified.values.push_back(u.at(grid.time_of(k)));
    }
  }
  const double base = objective_functional(u, laws, pen, start);
  const double changed = objective_functional(modified, laws, pen, start);
  return std::abs(base - changed) <= 1e-13 * std::max(1.0, std::abs(base));
}

}  // namespace penflow
