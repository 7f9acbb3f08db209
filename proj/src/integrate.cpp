#include "qode/integrate.hpp"

namespace qode {

Trajectory integrate(const ControlSystem& sys, const InputSignal& input,
                     const Vec& x0, const TimeGrid& grid) {
  const int N = grid.steps;
  const double h = grid.dt();

  Trajectory traj;
  traj.grid = grid;
  traj.x.reserve(N + 1);
  traj.u.reserve(N + 1);
  traj.cost_samples.resize(N + 1);

  Vec x = x0;
  for (int k = 0; k <= N; ++k) {
    const double t = grid.time(k);
    if (!x.allFinite()) throw DivergenceError(t);
    Vec uk = input(x, t);
    traj.x.push_back(x);
    traj.u.push_back(uk);
    traj.cost_samples[k] = sys.running_cost(x, uk, t);
    if (k == N) break;

    const Vec k1 = sys.dynamics(x, uk, t);
    Vec x2 = x + 0.5 * h * k1;
    const Vec k2 = sys.dynamics(x2, input(x2, t + 0.5 * h), t + 0.5 * h);
    Vec x3 = x + 0.5 * h * k2;
    const Vec k3 = sys.dynamics(x3, input(x3, t + 0.5 * h), t + 0.5 * h);
    Vec x4 = x + h * k3;
    const Vec k4 = sys.dynamics(x4, input(x4, t + h), t + h);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!traj.x.back().allFinite()) throw DivergenceError(grid.horizon);
  traj.terminal_cost = sys.terminal_cost(traj.x.back());
  return traj;
}

}  // namespace qode
