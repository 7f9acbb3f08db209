#include <doctest.h>

#include "qode/filters.hpp"
#include "qode/integrate.hpp"

using namespace qode;

TEST_CASE("time grid validation") {
  CHECK_THROWS_AS(TimeGrid::make(0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid::make(-1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid::make(1.0, 1), std::invalid_argument);
  const TimeGrid grid = TimeGrid::make(2.0, 100);
  CHECK(grid.points() == 101);
  CHECK(grid.time(100) == 2.0);
  CHECK(grid.time(0) == 0.0);
}

TEST_CASE("trapezoid is exact for linear samples") {
  const TimeGrid grid = TimeGrid::make(3.0, 7);
  Vec samples(grid.points());
  for (int k = 0; k < grid.points(); ++k)
    samples[k] = 2.0 * grid.time(k) + 1.0;
  // integral of 2t+1 over [0,3] = 12
  CHECK(trapezoid(samples, grid) == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("time reversal is an involution") {
  Vec v(5);
  v << 1, 2, 3, 4, 5;
  CHECK((reversed(reversed(v)) - v).norm() == 0.0);
  std::vector<Vec> seq{v, 2 * v, 3 * v};
  const auto twice = reversed(reversed(seq));
  for (int i = 0; i < 3; ++i) CHECK((twice[i] - seq[i]).norm() == 0.0);
}

namespace {

ControlSystem exp_growth() {
  ControlSystem sys;
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.dynamics = [](const Vec& x, const Vec&, double) { return x; };
  sys.running_cost = [](const Vec& x, const Vec&, double) { return x[0]; };
  sys.terminal_cost = [](const Vec& x) { return x[0]; };
  return sys;
}

}  // namespace

TEST_CASE("RK4 has fourth-order accuracy") {
  const ControlSystem sys = exp_growth();
  const Vec x0 = Vec::Ones(1);
  const InputSignal u = constant_input(Vec::Zero(1));
  const double exact = std::exp(1.0);
  auto err = [&](int n) {
    const Trajectory traj = integrate(sys, u, x0, TimeGrid::make(1.0, n));
    return std::abs(traj.x.back()[0] - exact);
  };
  const double e1 = err(50);
  const double e2 = err(100);
  CHECK(e2 < e1);
  CHECK(e1 / e2 > 12.0);  // ~16 for order 4
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("integration fills cost samples and terminal cost") {
  const ControlSystem sys = exp_growth();
  const Trajectory traj = integrate(sys, constant_input(Vec::Zero(1)),
                                    Vec::Ones(1), TimeGrid::make(1.0, 200));
  CHECK(traj.cost_samples.size() == 201);
  CHECK(traj.cost_samples[0] == 1.0);
  CHECK(traj.terminal_cost == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
  // total = int e^t + e = (e - 1) + e
  CHECK(total_cost(traj) ==
        doctest::Approx(2.0 * std::exp(1.0) - 1.0).epsilon(1e-6));
}

TEST_CASE("finite-time blow-up raises DivergenceError") {
  ControlSystem sys;
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.dynamics = [](const Vec& x, const Vec&, double) {
    return Vec(x.array().square());
  };
  sys.running_cost = [](const Vec&, const Vec&, double) { return 0.0; };
  sys.terminal_cost = [](const Vec&) { return 0.0; };
  // xdot = x^2, x0 = 1 blows up at t = 1 < 2.
  CHECK_THROWS_AS(integrate(sys, constant_input(Vec::Zero(1)), Vec::Ones(1),
                            TimeGrid::make(2.0, 400)),
                  DivergenceError);
}

TEST_CASE("closed-loop input is re-evaluated at stage states") {
  // xdot = -x with u = -x as feedback through the input: dynamics use u.
  ControlSystem sys;
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.dynamics = [](const Vec&, const Vec& u, double) { return u; };
  sys.running_cost = [](const Vec&, const Vec&, double) { return 0.0; };
  sys.terminal_cost = [](const Vec&) { return 0.0; };
  const InputSignal fb = [](const Vec& x, double) { return Vec(-x); };
  const Trajectory traj =
      integrate(sys, fb, Vec::Ones(1), TimeGrid::make(1.0, 100));
  CHECK(traj.x.back()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}
