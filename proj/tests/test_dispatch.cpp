#include <doctest.h>

#include <random>

#include "qode/integrate.hpp"
#include "qode/scenario.hpp"

using namespace qode;

namespace {

DispatchScenario small_scenario() {
  DispatchScenario sc = default_dispatch_scenario();
  sc.basis.n_f = 3;
  sc.grid = TimeGrid::make(sc.model.horizon, 96);
  sc.runs = 4;
  return sc;
}

Vec random_state(int dim, std::mt19937_64& rng, double box = 1.0) {
  std::uniform_real_distribution<double> unit(-box, box);
  Vec x(dim);
  for (int i = 0; i < dim; ++i) x[i] = unit(rng);
  return x;
}

}  // namespace

TEST_CASE("net load value and derivative are consistent") {
  const NetLoad load =
      synth_net_load(1.5, {{0.8, 24.0, 0.5}, {0.3, 6.0, 1.2}});
  for (double t : {0.0, 3.7, 11.0, 23.9}) {
    const double h = 1e-6;
    const double fd = (load.value(t + h) - load.value(t - h)) / (2 * h);
    CHECK(load.derivative(t) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(synth_net_load(2.0, {}).value(5.0) == 2.0);
  CHECK(synth_net_load(2.0, {}).derivative(5.0) == 0.0);
}

TEST_CASE("balance identities hold exactly") {
  const DispatchScenario sc = small_scenario();
  std::mt19937_64 rng(3);
  const Vec xa = random_state(2 * sc.model.M, rng);
  const Vec u = random_state(sc.model.M, rng);
  const double t = 7.3;
  CHECK(sc.model.generation(xa, t) ==
        sc.model.load.value(t) - xa.tail(sc.model.M).sum());
  CHECK(sc.model.generation_ramp(u, t) ==
        sc.model.load.derivative(t) - u.sum());
}

TEST_CASE("soft capacity cost is even, smooth and strongly convex") {
  const DispatchScenario sc = small_scenario();
  const DERModel& m = sc.model;
  CHECK(m.soft_capacity_cost(0, 0.0) == 0.0);
  CHECK(m.soft_capacity_cost(0, 1.3) ==
        doctest::Approx(m.soft_capacity_cost(0, -1.3)));
  for (double x : {-2.0, -0.3, 0.0, 0.7, 5.0}) {
    const double h = 1e-6;
    const double fd =
        (m.soft_capacity_cost(1, x + h) - m.soft_capacity_cost(1, x - h)) /
        (2 * h);
    CHECK(m.soft_capacity_grad(1, x) == doctest::Approx(fd).epsilon(1e-6));
    // Strong convexity: second difference bounded below by 2 a_i. A wider
    // step keeps the floating-point cancellation below the margin.
    const double h2 = 1e-4;
    const double second = (m.soft_capacity_cost(1, x + h2) +
                           m.soft_capacity_cost(1, x - h2) -
                           2 * m.soft_capacity_cost(1, x)) /
                          (h2 * h2);
    CHECK(second >= 2.0 * m.cap_scale[1] - 1e-3);
  }
  // log-cosh stays finite far out.
  CHECK(std::isfinite(m.soft_capacity_cost(0, 500.0)));
}

TEST_CASE("running cost gradients match finite differences") {
  const DispatchScenario sc = small_scenario();
  std::mt19937_64 rng(5);
  const Vec xa = random_state(2 * sc.model.M, rng);
  const Vec u = random_state(sc.model.M, rng);
  const double t = 13.2;
  Vec d_xa, d_u;
  sc.model.running_cost_grad(xa, u, t, &d_xa, &d_u);
  const double h = 1e-6;
  for (int i = 0; i < 2 * sc.model.M; ++i) {
    Vec xp = xa, xm = xa;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (sc.model.running_cost(xp, u, t) -
                       sc.model.running_cost(xm, u, t)) /
                      (2 * h);
    CHECK(d_xa[i] == doctest::Approx(fd).epsilon(1e-5));
  }
  for (int i = 0; i < sc.model.M; ++i) {
    Vec up = u, um = u;
    up[i] += h;
    um[i] -= h;
    const double fd = (sc.model.running_cost(xa, up, t) -
                       sc.model.running_cost(xa, um, t)) /
                      (2 * h);
    CHECK(d_u[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("basis vanishes at the horizon so J^theta(., T) = J0") {
  const DispatchScenario sc = small_scenario();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec xa = random_state(2 * sc.model.M, rng, 2.0);
    const Vec theta = random_state(sc.basis.dim(), rng, 3.0);
    CHECK(der_value(sc.model, sc.basis, theta, xa, sc.model.horizon) ==
          doctest::Approx(sc.model.terminal_value(xa)).epsilon(1e-12));
  }
}

TEST_CASE("basis gradients match finite differences") {
  const DispatchBasis basis{4, true, 24.0};
  const double xs = 0.7, zs = -1.2, t = 9.4, h = 1e-6;
  Vec psi, d_xs, d_zs, d_t;
  basis.eval_grads(xs, zs, t, &psi, &d_xs, &d_zs, &d_t);
  CHECK((psi - basis.eval(xs, zs, t)).cwiseAbs().maxCoeff() == 0.0);
  const Vec fd_xs =
      (basis.eval(xs + h, zs, t) - basis.eval(xs - h, zs, t)) / (2 * h);
  const Vec fd_zs =
      (basis.eval(xs, zs + h, t) - basis.eval(xs, zs - h, t)) / (2 * h);
  const Vec fd_t =
      (basis.eval(xs, zs, t + h) - basis.eval(xs, zs, t - h)) / (2 * h);
  CHECK((d_xs - fd_xs).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((d_zs - fd_zs).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((d_t - fd_t).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("H-class features satisfy the generator identity") {
  // h0 + theta' psi_H must equal c - sigma J^theta + d/dt J^theta along the
  // flow; check the time derivative by finite differences along a rollout.
  const DispatchScenario sc = small_scenario();
  const BasisSet basis = der_value_class(sc.model, sc.basis, sc.sigma);
  const ControlSystem sys = make_der_system(sc.model);
  std::mt19937_64 rng(9);
  const Vec theta = random_state(sc.basis.dim(), rng, 2.0);
  const Vec u = random_state(sc.model.M, rng);
  const Vec xa = random_state(2 * sc.model.M, rng);
  const double t = 6.0, h = 1e-5;

  const double lhs = basis.offset_at(xa, u, t) +
                     theta.dot(basis.features(xa, u, t));
  // d/dt J^theta(x(t), t) along xdot = F(x, u).
  const Vec xp = xa + h * sys.dynamics(xa, u, t);
  const Vec xm = xa - h * sys.dynamics(xa, u, t);
  const double dj = (der_value(sc.model, sc.basis, theta, xp, t + h) -
                     der_value(sc.model, sc.basis, theta, xm, t - h)) /
                    (2 * h);
  const double rhs = sc.model.running_cost(xa, u, t) -
                     sc.sigma * der_value(sc.model, sc.basis, theta, xa, t) +
                     dj;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
}

TEST_CASE("H^theta depends on u only through the aggregate input") {
  const DispatchScenario sc = small_scenario();
  const BasisSet basis = der_value_class(sc.model, sc.basis, sc.sigma);
  std::mt19937_64 rng(11);
  const Vec theta = random_state(sc.basis.dim(), rng, 2.0);
  const Vec xa = random_state(2 * sc.model.M, rng);
  Vec u1 = random_state(sc.model.M, rng);
  Vec u2 = Vec::Zero(sc.model.M);
  u2[0] = u1.sum();  // same aggregate, different split
  const double t = 15.5;
  CHECK(eval_H(theta, basis, xa, u1, t) ==
        doctest::Approx(eval_H(theta, basis, xa, u2, t)).epsilon(1e-12));
}

TEST_CASE("scalar greedy matches a fine box grid over the full input") {
  const DispatchScenario sc = small_scenario();
  const BasisSet basis = der_value_class(sc.model, sc.basis, sc.sigma);
  std::mt19937_64 rng(13);
  const Vec theta = random_state(sc.basis.dim(), rng, 0.5);
  const Vec xa = random_state(2 * sc.model.M, rng);
  const double t = 10.0;

  const int M = sc.model.M;
  const GreedyResult exact = greedy_u(
      theta, basis, xa, t, AnalyticScalarQuadratic{[M](double s) {
        Vec u = Vec::Zero(M);
        u[0] = s;
        return u;
      }});
  // Grid over the aggregate only (the class is constant on level sets of
  // u_sigma), centered on the analytic minimizer since the shallow curvature
  // can push it far out; fine enough that the gap is ~(spacing/2)^2 kappa.
  BoxGrid grid;
  grid.lo = Vec::Constant(1, exact.u[0] - 10.0);
  grid.hi = Vec::Constant(1, exact.u[0] + 10.0);
  grid.points_per_axis = 2001;
  BasisSet embed = basis;
  embed.features = [&basis, M](const Vec& x, const Vec& s, double tt) {
    Vec u = Vec::Zero(M);
    u[0] = s[0];
    return basis.features(x, u, tt);
  };
  embed.offset = [&basis, M](const Vec& x, const Vec& s, double tt) {
    Vec u = Vec::Zero(M);
    u[0] = s[0];
    return basis.offset(x, u, tt);
  };
  const GreedyResult boxed = greedy_u(theta, embed, xa, t, grid);
  const double spacing = 20.0 / 2000.0;
  CHECK(std::abs(exact.value - boxed.value) <=
        sc.model.kappa * spacing * spacing / 4.0 + 1e-9);
}

TEST_CASE("model perturbation semantics") {
  const DispatchScenario sc = small_scenario();
  std::mt19937_64 rng(17);
  const DERModel same = perturb_model(sc.model, 0.0, rng);
  CHECK((same.alpha - sc.model.alpha).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng_a(21), rng_b(21);
  const DERModel p1 = perturb_model(sc.model, 1.0, rng_a);
  const DERModel p2 = perturb_model(sc.model, 1.0, rng_b);
  CHECK((p1.alpha - p2.alpha).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < sc.model.M; ++i) {
    CHECK(p1.alpha[i] >= 0.0);
    CHECK(p1.alpha[i] <= 2.0 * sc.model.alpha[i]);
  }
  CHECK(p1.hash() != sc.model.hash());
}

TEST_CASE("training batch generation modes") {
  const DispatchScenario sc = small_scenario();
  const GeneratedBatch nominal = gen_training_batch(
      sc.model, sc.basis, TrainingMode::Nominal, 5, sc.exploration, sc.grid,
      sc.sigma, 23);
  CHECK(nominal.batch.size() == 5);
  CHECK(static_cast<int>(nominal.model_hashes.size()) == 5);
  for (auto h : nominal.model_hashes) CHECK(h == sc.model.hash());

  const GeneratedBatch robust = gen_training_batch(
      sc.model, sc.basis, TrainingMode::Robust, 5, sc.exploration, sc.grid,
      sc.sigma, 23);
  int distinct = 0;
  for (std::size_t i = 1; i < robust.model_hashes.size(); ++i)
    if (robust.model_hashes[i] != sc.model.hash()) ++distinct;
  CHECK(distinct == 4);  // run 0 stays nominal

  // Determinism: same seed, same trajectories.
  const GeneratedBatch again = gen_training_batch(
      sc.model, sc.basis, TrainingMode::Nominal, 5, sc.exploration, sc.grid,
      sc.sigma, 23);
  CHECK((again.batch.trajectories[2].x[50] -
         nominal.batch.trajectories[2].x[50])
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("dimension switch drops the constant spatial factor") {
  DispatchBasis with{30, true, 24.0};
  DispatchBasis without{30, false, 24.0};
  CHECK(with.dim() == 186);
  CHECK(without.dim() == 155);
  CHECK(with.sign_mask().size() == 62);
}

TEST_CASE("sign-constrained training yields state-convex value estimates") {
  // With nonnegative quadratic coefficients the 2x2 Hessian of J^theta in
  // (x_sigma, z_sigma) is PSD whenever the cross coefficient is dominated;
  // here we check the construction directly on a constrained theta.
  DispatchScenario sc = small_scenario();
  const int nt = sc.basis.n_temporal();
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  Vec theta = Vec::Zero(sc.basis.dim());
  for (int j = 0; j < nt; ++j) {
    theta[0 * nt + j] = pos(rng);  // (x_sigma)^2
    theta[2 * nt + j] = pos(rng);  // (z_sigma)^2
  }
  for (int k = 0; k <= sc.grid.steps; k += 8) {
    const double t = sc.grid.time(k);
    const double h = 1e-4;
    auto J = [&](double xs, double zs) {
      Vec xa = Vec::Zero(2 * sc.model.M);
      xa[0] = xs;
      xa[sc.model.M] = zs;
      return der_value(sc.model, sc.basis, theta, xa, t);
    };
    const double jxx = (J(h, 0) - 2 * J(0, 0) + J(-h, 0)) / (h * h);
    const double jzz = (J(0, h) - 2 * J(0, 0) + J(0, -h)) / (h * h);
    const double jxz =
        (J(h, h) - J(h, -h) - J(-h, h) + J(-h, -h)) / (4 * h * h);
    CHECK(jxx >= -1e-6);
    CHECK(jzz >= -1e-6);
    CHECK(jxx * jzz - jxz * jxz >= -1e-4);
  }
}
