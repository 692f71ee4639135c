// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

// Linear advection z_t + lambda z_x = 0 on x in (0, 1) with inflow z(0, t) = u(t),
// discretized by the left-sided upwind scheme
//
//   z_j^{n+1} = (1 - c) z_j^n + c z_{j-1}^n,   c = lambda dt / dx,
//
// with the inflow as ghost value z_{-1}^n = u_n. At c = 1 the update is an
// exact shift by one cell and the output is the inflow delayed by 1/lambda.

#pragma once

#include <vector>

namespace penflow {

struct GridSpec {
  double dx = 0.1;
  double lambda = 1.0;
  double dt = 0.1;
  double T = 1.0;

  /// Grid with dt = dx / lambda (CFL number exactly 1).
  static GridSpec unit_cfl(double dx, double lambda, double T);

  /// Throws ValidationError on CFL > 1, non-integer cell/step counts, or a
  /// transit time that is not a whole number of steps.
  void validate() const;

  int cells() const;
  int steps() const;
  /// Steps needed for one good to cross the line (1/lambda / dt).
  int transit_steps() const;
  /// Steps in the control horizon [0, T - 1/lambda).
  int control_steps() const;
  double cfl() const;
  /// True when the CFL number is 1 to rounding, i.e. the scheme is a pure shift.
  bool exact_shift() const;
  double time_of(int step) const { return step * dt; }
  /// Step index of a grid-aligned time; throws ValidationError if t is off-grid.
  int step_of(double t) const;

  bool operator==(const GridSpec&) const = default;
};

/// Discretized line content z(x, t): one value per cell plus the step counter.
struct LineState {
  GridSpec grid;
  std::vector<double> z;
  int step_index = 0;

  double t() const { return grid.time_of(step_index); }
};

/// Piecewise-constant inflow: values[k] is applied on
/// [t_start + k dt, t_start + (k + 1) dt).
struct ControlSchedule {
  double t_start = 0.0;
  double dt = 0.0;
  std::vector<double> values;

  double t_end() const { return t_start + dt * static_cast<double>(values.size()); }
  /// Value in force at time t; held at the last value beyond t_end().
  double at(double t) const;
};

LineState init_line(const GridSpec& grid);

/// One upwind update with `inflow` as the ghost value. Throws past T.
void step_in_place(LineState& state, double inflow);
LineState step(LineState state, double inflow);

/// Boundary trace at x = 1 (the last cell).
double output(const LineState& state);

struct ScheduleRun {
  LineState state;
  std::vector<double> times;    ///< time after each update
  std::vector<double> outputs;  ///< output after each update
};

/// Advances `state` to t_end under schedule u. Steps past the end of u hold
/// the last control value.
ScheduleRun run_schedule(LineState state, const ControlSchedule& u, double t_end);

/// Exact boundary trace for zero initial data: u(s - 1/lambda).
double delay_oracle(const ControlSchedule& u, double lambda, double s);

}  // namespace penflow
