#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>

namespace qode {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Axis-aligned box, used for input sets.
struct Box {
  Vec lo, hi;
};

/// Controlled ODE with running and terminal cost.
struct ControlSystem {
  int state_dim = 0;
  int input_dim = 0;
  std::function<Vec(const Vec& x, const Vec& u, double t)> dynamics;
  std::function<double(const Vec& x, const Vec& u, double t)> running_cost;
  std::function<double(const Vec& x)> terminal_cost;
  std::optional<Box> input_box;  // empty = unconstrained
};

/// Feedback input; open-loop signals simply ignore the state argument.
using InputSignal = std::function<Vec(const Vec& x, double t)>;

inline InputSignal open_loop(std::function<Vec(double)> u) {
  return [u = std::move(u)](const Vec&, double t) { return u(t); };
}

inline InputSignal constant_input(Vec u) {
  return [u = std::move(u)](const Vec&, double) { return u; };
}

}  // namespace qode
