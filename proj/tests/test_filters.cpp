#include <doctest.h>

#include "qode/filters.hpp"

using namespace qode;

TEST_CASE("filter boundary condition and zero input") {
  const TimeGrid grid = TimeGrid::make(2.0, 50);
  const Vec zero = Vec::Zero(grid.points());
  CHECK(exp_filter(zero, 1.3, grid).cwiseAbs().maxCoeff() == 0.0);
  Vec ramp(grid.points());
  for (int k = 0; k < grid.points(); ++k) ramp[k] = grid.time(k);
  CHECK(exp_filter(ramp, 1.3, grid)[0] == 0.0);
}

TEST_CASE("filter of a constant input is exact") {
  const TimeGrid grid = TimeGrid::make(3.0, 120);
  const double sigma = 0.7, level = 2.5;
  const Vec in = Vec::Constant(grid.points(), level);
  const Vec out = exp_filter(in, sigma, grid);
  for (int k = 0; k < grid.points(); ++k) {
    const double exact = level * (1.0 - std::exp(-sigma * grid.time(k)));
    CHECK(out[k] == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("filter of a linear input is exact") {
  // y' = sigma(at + b - y) with y(0)=0 has closed form; the discrete update
  // assumes piecewise-linear input, so a globally linear input is exact.
  const TimeGrid grid = TimeGrid::make(2.0, 37);
  const double sigma = 1.9, a = 1.2, b = -0.4;
  Vec in(grid.points());
  for (int k = 0; k < grid.points(); ++k) in[k] = a * grid.time(k) + b;
  const Vec out = exp_filter(in, sigma, grid);
  for (int k = 0; k < grid.points(); ++k) {
    const double t = grid.time(k);
    const double exact = a * t + b - a / sigma -
                         (b - a / sigma) * std::exp(-sigma * t);
    CHECK(out[k] == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("filter is linear") {
  const TimeGrid grid = TimeGrid::make(1.0, 64);
  Vec f(grid.points()), g(grid.points());
  for (int k = 0; k < grid.points(); ++k) {
    f[k] = std::sin(5.0 * grid.time(k));
    g[k] = std::cos(3.0 * grid.time(k)) + grid.time(k);
  }
  const double sigma = 0.9;
  const Vec combo = exp_filter(2.0 * f - 3.0 * g, sigma, grid);
  const Vec parts =
      2.0 * exp_filter(f, sigma, grid) - 3.0 * exp_filter(g, sigma, grid);
  CHECK((combo - parts).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("tiny sigma limit matches the series expansion") {
  const TimeGrid grid = TimeGrid::make(1.0, 100);
  Vec in(grid.points());
  for (int k = 0; k < grid.points(); ++k) in[k] = 1.0 + grid.time(k);
  const double sigma = 1e-9;
  const Vec out = exp_filter(in, sigma, grid);
  // y ~ sigma * int_0^r s(v) dv to first order.
  for (int k = 0; k < grid.points(); k += 10) {
    const double t = grid.time(k);
    const double approx = sigma * (t + 0.5 * t * t);
    CHECK(out[k] == doctest::Approx(approx).epsilon(1e-6));
  }
}

TEST_CASE("column filtering matches per-column filtering") {
  const TimeGrid grid = TimeGrid::make(2.0, 30);
  Mat in(grid.points(), 3);
  for (int k = 0; k < grid.points(); ++k)
    for (int c = 0; c < 3; ++c)
      in(k, c) = std::sin((c + 1) * grid.time(k)) + c;
  const Mat out = exp_filter_cols(in, 1.1, grid);
  for (int c = 0; c < 3; ++c) {
    const Vec col = exp_filter(in.col(c), 1.1, grid);
    CHECK((out.col(c) - col).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("filtered signals index reversed time and the terminal term") {
  BasisSet basis;
  basis.dim = 1;
  basis.features = [](const Vec& x, const Vec&, double) {
    return Vec::Constant(1, x[0]);
  };
  const TimeGrid grid = TimeGrid::make(1.0, 20);
  Trajectory traj;
  traj.grid = grid;
  traj.cost_samples = Vec::Zero(grid.points());
  for (int k = 0; k < grid.points(); ++k) {
    traj.x.push_back(Vec::Constant(1, grid.time(k)));
    traj.u.push_back(Vec::Zero(1));
    traj.cost_samples[k] = grid.time(k);
  }
  traj.terminal_cost = 3.0;
  const double sigma = 0.5;
  const FilteredSignals sig = build_filtered(traj, basis, sigma);
  // psi_rev[k] = x at forward index n-1-k.
  CHECK(sig.psi_rev(0, 0) == doctest::Approx(1.0));
  CHECK(sig.psi_rev(grid.steps, 0) == doctest::Approx(0.0));
  for (int k = 0; k < grid.points(); ++k) {
    const double r = grid.time(k);
    CHECK(sig.terminal_term[k] ==
          doctest::Approx(sigma * std::exp(-sigma * r) * 3.0).epsilon(1e-12));
  }
  CHECK(sig.cost_filt[0] == 0.0);
}
