#pragma once

#include <stdexcept>
#include <string>

#include "qode/trajectory.hpp"

namespace qode {

/// Thrown when the state leaves the finite range during integration.
struct DivergenceError : std::runtime_error {
  double blow_up_time;
  explicit DivergenceError(double t)
      : std::runtime_error("integration diverged at t = " + std::to_string(t)),
        blow_up_time(t) {}
};

/// Fixed-step RK4 integration of xdot = F(x, u, t). The input is re-evaluated
/// at each stage time with the stage state, so closed-loop order is preserved.
Trajectory integrate(const ControlSystem& sys, const InputSignal& input,
                     const Vec& x0, const TimeGrid& grid);

}  // namespace qode
