// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "transport.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace penflow {

namespace {

constexpr double kGridTol = 1e-9;

bool near_integer(double x, long& n) {
  n = std::lround(x);
  return n > 0 && std::abs(x - static_cast<double>(n)) <= kGridTol * std::max(1.0, std::abs(x));
}

}  // namespace

GridSpec GridSpec::unit_cfl(double dx, double lambda, double T) { return {dx, lambda, dx / lambda, T}; }

void GridSpec::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda > 0 violated");
  if (!(dx > 0.0) || !(dt > 0.0) || !(T > 0.0)) {
    throw ValidationError("dx, dt and T must be positive");
  }
  long n = 0;
  if (!near_integer(1.0 / dx, n)) throw ValidationError("1/dx must be a positive integer");
  if (!near_integer(T / dt, n)) throw ValidationError("T/dt must be a positive integer");
  if (cfl() > 1.0 + 1e-12) {
    throw ValidationError("CFL condition lambda*dt/dx <= 1 violated (CFL = " +
                          std::to_string(cfl()) + ")");
  }
  if (!(T > 1.0 / lambda + kGridTol)) {
    throw ValidationError("horizon shorter than transit time (T must exceed 1/lambda)");
  }
  if (!near_integer(1.0 / (lambda * dt), n)) {
    throw ValidationError("transit time 1/lambda must be a whole number of time steps");
  }
}

int GridSpec::cells() const { return static_cast<int>(std::lround(1.0 / dx)); }
int GridSpec::steps() const { return static_cast<int>(std::lround(T / dt)); }
int GridSpec::transit_steps() const { return static_cast<int>(std::lround(1.0 / (lambda * dt))); }
int GridSpec::control_steps() const { return steps() - transit_steps(); }
double GridSpec::cfl() const { return lambda * dt / dx; }
bool GridSpec::exact_shift() const { return std::abs(cfl() - 1.0) <= 1e-12; }

int GridSpec::step_of(double t) const {
  const long k = std::lround(t / dt);
  if (std::abs(t - static_cast<double>(k) * dt) > kGridTol * std::max(1.0, std::abs(t))) {
    throw ValidationError("time " + std::to_string(t) + " is not a multiple of dt");
  }
  return static_cast<int>(k);
}

double ControlSchedule::at(double t) const {
  if (values.empty()) throw ValidationError("control schedule is empty");
  if (t < t_start - 1e-12) throw ValidationError("control schedule queried before its start");
  // Small offset so grid points land in the step they open.
  const auto k = static_cast<std::size_t>(std::floor((t - t_start) / dt + 1e-9));
  return values[std::min(k, values.size() - 1)];
}

LineState init_line(const GridSpec& grid) {
  grid.validate();
  return {grid, std::vector<double>(static_cast<std::size_t>(grid.cells()), 0.0), 0};
}

void step_in_place(LineState& state, double inflow) {
  if (state.step_index >= state.grid.steps()) {
    throw ValidationError("step: cannot advance past T");
  }
  const double c = state.grid.exact_shift() ? 1.0 : state.grid.cfl();
  auto& z = state.z;
  // Right to left so z[j-1] still holds the old value.
  for (std::size_t j = z.size() - 1; j > 0; --j) {
    z[j] = (1.0 - c) * z[j] + c * z[j - 1];
  }
  z[0] = (1.0 - c) * z[0] + c * inflow;
  ++state.step_index;
}

LineState step(LineState state, double inflow) {
  step_in_place(state, inflow);
  return state;
}

double output(const LineState& state) { return state.z.back(); }

ScheduleRun run_schedule(LineState state, const ControlSchedule& u, double t_end) {
  const GridSpec& grid = state.grid;
  const int k_end = grid.step_of(t_end);
  if (k_end > grid.steps()) throw ValidationError("run_schedule: t_end beyond T");
  if (k_end < state.step_index) throw ValidationError("run_schedule: t_end before current time");

  ScheduleRun run;
  run.times.reserve(static_cast<std::size_t>(k_end - state.step_index));
  run.outputs.reserve(run.times.capacity());
  if (k_end == state.step_index) {
    run.state = std::move(state);
    return run;
  }

  if (std::abs(u.dt - grid.dt) > 1e-12 * grid.dt) {
    throw ValidationError("run_schedule: schedule step differs from grid dt");
  }
  const int k_first = grid.step_of(u.t_start);
  if (k_first != state.step_index) {
    throw ValidationError("run_schedule: schedule does not start at the line state's time");
  }
  const int k_covered = k_first + static_cast<int>(u.values.size());
  if (u.values.empty() || k_covered < std::min(k_end, grid.control_steps())) {
    throw ValidationError("run_schedule: schedule does not cover the control horizon");
  }

  for (int k = state.step_index; k < k_end; ++k) {
    const double inflow = k < k_covered ? u.values[static_cast<std::size_t>(k - k_first)]
                                        : u.values.back();
    step_in_place(state, inflow);
    run.times.push_back(state.t());
    run.outputs.push_back(output(state));
  }
  run.state = std::move(state);
  return run;
}

double delay_oracle(const ControlSchedule& u, double lambda, double s) {
  const double transit = 1.0 / lambda;
  if (s < transit - 1e-12) throw ValidationError("delay_oracle: requires s >= 1/lambda");
  return u.at(s - transit);
}

}  // namespace penflow
