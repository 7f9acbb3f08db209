#pragma once

#include <vector>

#include "qode/grid.hpp"
#include "qode/system.hpp"

namespace qode {

/// One rollout sampled on a time grid: states, inputs, running-cost samples
/// and the terminal cost. Immutable by convention after construction.
struct Trajectory {
  TimeGrid grid;
  std::vector<Vec> x;  // N+1 states
  std::vector<Vec> u;  // N+1 inputs
  Vec cost_samples;    // c(x_k, u_k, t_k)
  double terminal_cost = 0.0;
};

/// Eq-style total objective: trapezoid of the running cost plus terminal cost.
inline double total_cost(const Trajectory& traj) {
  return trapezoid(traj.cost_samples, traj.grid) + traj.terminal_cost;
}

/// Running-cost integral only (no terminal term).
inline double running_cost_integral(const Trajectory& traj) {
  return trapezoid(traj.cost_samples, traj.grid);
}

}  // namespace qode
