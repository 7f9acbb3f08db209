#pragma once

#include <stdexcept>
#include <vector>

namespace qode {

/// Uniform time grid on [0, T] with N steps (N+1 points).
struct TimeGrid {
  double horizon = 0.0;
  int steps = 0;

  static TimeGrid make(double T, int N) {
    if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
    if (N < 2) throw std::invalid_argument("TimeGrid: need at least 2 steps");
    return TimeGrid{T, N};
  }

  double dt() const { return horizon / steps; }
  int points() const { return steps + 1; }

  // Last point is exactly the horizon.
  double time(int k) const {
    return k == steps ? horizon : k * dt();
  }

  std::vector<double> times() const {
    std::vector<double> t(points());
    for (int k = 0; k <= steps; ++k) t[k] = time(k);
    return t;
  }

  bool operator==(const TimeGrid&) const = default;
};

/// Trapezoidal quadrature of samples over the grid.
template <class Seq>
double trapezoid(const Seq& samples, const TimeGrid& grid) {
  const int n = grid.points();
  double acc = 0.5 * (samples[0] + samples[n - 1]);
  for (int k = 1; k < n - 1; ++k) acc += samples[k];
  return acc * grid.dt();
}

}  // namespace qode
