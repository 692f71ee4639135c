// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

// Inflow control of the transport line against Gaussian demand laws.
//
// Discretization: control step k (inflow on [k dt, (k+1) dt)) reaches the
// end of the line after transit_steps updates, so at CFL 1 it fixes the
// output at node time (k + transit_steps) dt and nothing else. The objective
// is the rectangle rule with weight dt over those nodes; a control window
// [k0, k0 + L) is scored on nodes [k0 + transit, k0 + transit + L).

#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "demand.hpp"
#include "descent.hpp"
#include "objective.hpp"
#include "transport.hpp"

namespace penflow {

enum class SolverKind { pointwise, descent };

/// Objective window [1/lambda, T] and control horizon [0, T - 1/lambda).
struct Horizon {
  double T = 1.0;
  double lambda = 1.0;

  double transit_time() const { return 1.0 / lambda; }
  double control_end() const { return T - transit_time(); }
  void validate() const;
};

Horizon horizon_of(const GridSpec& grid);

/// Times at which CM2 re-conditions on realized demand; first entry is 0.
struct UpdateSchedule {
  std::vector<double> update_times{0.0};

  /// n equal subintervals of the control horizon.
  static UpdateSchedule uniform(int n, const GridSpec& grid);

  void validate(const GridSpec& grid) const;

  bool operator==(const UpdateSchedule&) const = default;
};

struct Bounds {
  double u_min = 0.0;
  double u_max = std::numeric_limits<double>::infinity();

  void validate() const;

  bool operator==(const Bounds&) const = default;
};

/// Law of demand at an objective node time.
using LawProvider = std::function<GaussianLaw(double)>;

/// Control steps [first_step, first_step + length) starting from `initial`,
/// whose step_index must equal first_step.
struct Subproblem {
  LineState initial;
  int first_step = 0;
  int length = 0;
};

/// Whole control horizon from an empty line (CM1).
Subproblem full_horizon(const GridSpec& grid);

struct SolverDiagnostics {
  int iterations = 0;
  double projected_gradient_norm = 0.0;
  bool converged = false;
};

struct SolveResult {
  ControlSchedule schedule;
  std::vector<double> node_times;
  std::vector<double> output_trace;
  std::vector<GaussianLaw> node_laws;
  double objective_value = 0.0;
  SolverDiagnostics diagnostics;
};

struct ObjectiveEvaluation {
  double value = 0.0;
  std::vector<double> node_times;
  std::vector<double> outputs;
  std::vector<GaussianLaw> laws;
};

/// Runs u from z_init and scores the nodes fed by u's in-horizon steps.
ObjectiveEvaluation evaluate_objective(const ControlSchedule& u, const LawProvider& laws,
                                       const PenaltyParams& pen, const LineState& z_init);

double objective_functional(const ControlSchedule& u, const LawProvider& laws,
                            const PenaltyParams& pen, const LineState& z_init);

/// argmin over y in [u_min, u_max] of of_pen(law, y), by bracketing the root
/// of the analytic derivative to 1e-10 or better.
double minimize_node(const GaussianLaw& law, const PenaltyParams& pen, const Bounds& bounds);

/// Node-by-node minimization through the exact delay map. Requires CFL 1.
SolveResult solve_pointwise(const LawProvider& laws, const PenaltyParams& pen,
                            const Bounds& bounds, const Subproblem& sub);

/// Projected quasi-Newton descent on the discretized control vector with the
/// gradient assembled by the adjoint of the upwind scheme. Works at any CFL.
SolveResult solve_descent(const LawProvider& laws, const PenaltyParams& pen, const Bounds& bounds,
                          const Subproblem& sub, const ControlSchedule& u0,
                          const DescentOptions& options = {});

/// Law of Y_s given only Y_0 = y0.
LawProvider cm1_law_provider(const OUParams& p);

/// Node laws of a CM2 run: a node in [t_i + 1/lambda, t_{i+1} + 1/lambda) is
/// scored against the law conditioned on the path's value at update time t_i.
LawProvider cm2_law_provider(const OUParams& p, const GridSpec& grid,
                             const UpdateSchedule& sched, const DemandPath& path);

SolveResult solve_cm1(const OUParams& p, const PenaltyParams& pen, const GridSpec& grid,
                      const Bounds& bounds, SolverKind solver = SolverKind::pointwise);

SolveResult solve_cm2(const OUParams& p, const PenaltyParams& pen, const GridSpec& grid,
                      const Bounds& bounds, const UpdateSchedule& sched, const DemandPath& path,
                      SolverKind solver = SolverKind::pointwise);

/// True iff replacing the inflow from `tail_from` (default T - 1/lambda) up
/// to T by `tail_value` leaves the objective unchanged to 1e-13.
bool objective_post_horizon_independence_check(const ControlSchedule& u, double tail_value,
                                               const LawProvider& laws, const PenaltyParams& pen,
                                               const GridSpec& grid,
                                               std::optional<double> tail_from = std::nullopt);

}  // namespace penflow
