#include "qode/mpc.hpp"

#include <cmath>

namespace qode {

namespace {

// Series-safe phi functions: phi1 = (1 - e^{-a h}) / a, phi2 = (h - phi1) / a.
void phis(double a, double h, double* E, double* p1, double* p2) {
  const double ah = a * h;
  *E = std::exp(-ah);
  if (std::abs(ah) > 1e-5) {
    *p1 = -std::expm1(-ah) / a;
    *p2 = (h - *p1) / a;
  } else {
    *p1 = h * (1.0 - ah * (0.5 - ah / 6.0));
    *p2 = h * h * (0.5 - ah * (1.0 / 6.0 - ah / 24.0));
  }
}

}  // namespace

DiscreteDispatch DiscreteDispatch::make(const DERModel& model, double h) {
  DiscreteDispatch d;
  d.M = model.M;
  d.h = h;
  d.E.resize(d.M);
  d.P1.resize(d.M);
  d.P2.resize(d.M);
  for (int i = 0; i < d.M; ++i)
    phis(model.alpha[i], h, &d.E[i], &d.P1[i], &d.P2[i]);
  return d;
}

Vec DiscreteDispatch::step(const Vec& xa, const Vec& u) const {
  Vec out(2 * M);
  for (int i = 0; i < M; ++i) {
    out[i] = E[i] * xa[i] - P1[i] * xa[M + i] - P2[i] * u[i];
    out[M + i] = xa[M + i] + h * u[i];
  }
  return out;
}

void DiscreteDispatch::adjoint(const Vec& lambda, Vec* d_xa, Vec* d_u) const {
  d_xa->resize(2 * M);
  d_u->resize(M);
  for (int i = 0; i < M; ++i) {
    (*d_xa)[i] = E[i] * lambda[i];
    (*d_xa)[M + i] = -P1[i] * lambda[i] + lambda[M + i];
    (*d_u)[i] = -P2[i] * lambda[i] + h * lambda[M + i];
  }
}

namespace {

struct WindowProblem {
  const DERModel* model;
  DiscreteDispatch disc;
  double t0 = 0.0;
  int K = 0;
  double h = 0.0;
  // Terminal value and gradient at the window end.
  std::function<double(const Vec&, Vec*)> terminal;

  double value(const Mat& U, std::vector<Vec>* states = nullptr) const {
    Vec x = x0;
    if (states) {
      states->clear();
      states->push_back(x);
    }
    double f = 0.0;
    for (int k = 0; k < K; ++k) {
      const Vec u = U.row(k).transpose();
      f += h * model->running_cost(x, u, t0 + k * h);
      x = disc.step(x, u);
      if (states) states->push_back(x);
    }
    return f + terminal(x, nullptr);
  }

  double value_and_grad(const Mat& U, Mat* G) const {
    std::vector<Vec> xs;
    const double f = value(U, &xs);
    Vec lambda;
    terminal(xs[K], &lambda);
    G->resize(K, disc.M);
    for (int k = K - 1; k >= 0; --k) {
      const Vec u = U.row(k).transpose();
      Vec d_xa, d_u, a_xa, a_u;
      disc.adjoint(lambda, &a_xa, &a_u);
      model->running_cost_grad(xs[k], u, t0 + k * h, &d_xa, &d_u);
      G->row(k) = (h * d_u + a_u).transpose();
      lambda = h * d_xa + a_xa;
    }
    return f;
  }

  Vec x0;
};

WindowProblem make_problem(const DERModel& model, const MpcConfig& cfg,
                           const Vec& xa0, double t0, int K, double h) {
  WindowProblem prob;
  prob.model = &model;
  prob.disc = DiscreteDispatch::make(model, h);
  prob.t0 = t0;
  prob.K = K;
  prob.h = h;
  prob.x0 = xa0;

  const double t_end = t0 + K * h;
  const bool truncated = t_end >= model.horizon - 1e-9 * model.horizon;
  TerminalKind kind = truncated ? TerminalKind::Fixed : cfg.terminal;
  // The learned terminal reduces to J0 at the horizon anyway (all basis
  // functions vanish at s = 0), so Learned is safe either way.
  if (cfg.terminal == TerminalKind::Learned) kind = TerminalKind::Learned;
  switch (kind) {
    case TerminalKind::Zero:
      prob.terminal = [M = model.M](const Vec&, Vec* g) {
        if (g) *g = Vec::Zero(2 * M);
        return 0.0;
      };
      break;
    case TerminalKind::Fixed:
      prob.terminal = [&model](const Vec& xa, Vec* g) {
        if (g) *g = model.terminal_grad(xa);
        return model.terminal_value(xa);
      };
      break;
    case TerminalKind::Learned:
      prob.terminal = [&model, &cfg, t_end](const Vec& xa, Vec* g) {
        if (g) *g = der_value_grad(model, cfg.basis, cfg.theta, xa, t_end);
        return der_value(model, cfg.basis, cfg.theta, xa, t_end);
      };
      break;
  }
  return prob;
}

WindowSolution minimize(const WindowProblem& prob, const Mat& u_init,
                        int max_iters, double grad_tol) {
  WindowSolution out;
  Mat U = u_init;
  Mat G;
  double f = prob.value_and_grad(U, &G);
  double step = 1e-2 / (1.0 + G.norm());
  Mat prev_U, prev_G;
  for (int it = 0; it < max_iters; ++it) {
    const double gnorm = G.lpNorm<Eigen::Infinity>();
    if (gnorm <= grad_tol * (1.0 + std::abs(f))) break;
    if (it > 0) {
      const Mat s = U - prev_U;
      const Mat y = G - prev_G;
      const double sy = (s.array() * y.array()).sum();
      if (sy > 1e-30) {
        step = (s.array() * s.array()).sum() / sy;  // BB1
        step = std::min(std::max(step, 1e-10), 1e4);
      }
    }
    prev_U = U;
    prev_G = G;
    const double g2 = (G.array() * G.array()).sum();
    double alpha = step;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      const Mat trial = U - alpha * G;
      const double ft = prob.value(trial);
      if (ft <= f - 1e-4 * alpha * g2) {
        U = trial;
        f = prob.value_and_grad(U, &G);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    out.iterations = it + 1;
    if (!accepted) break;
  }
  out.U = U;
  out.cost = f;
  return out;
}

}  // namespace

WindowSolution solve_window(const DERModel& model, const MpcConfig& cfg,
                            const Vec& xa0, double t0, int steps, double h,
                            const Mat& u_init) {
  const WindowProblem prob = make_problem(model, cfg, xa0, t0, steps, h);
  Mat init = u_init;
  if (init.rows() != steps || init.cols() != model.M)
    init = Mat::Zero(steps, model.M);
  return minimize(prob, init, cfg.max_iters, cfg.grad_tol);
}

OptimalSolution solve_dispatch_optimal(const DERModel& model,
                                       const TimeGrid& grid, const Vec& xa0,
                                       int max_iters, double grad_tol) {
  MpcConfig cfg;
  cfg.terminal = TerminalKind::Fixed;
  cfg.max_iters = max_iters;
  cfg.grad_tol = grad_tol;
  const int N = grid.steps;
  const double h = grid.dt();
  const WindowSolution sol =
      solve_window(model, cfg, xa0, 0.0, N, h, Mat::Zero(N, model.M));

  OptimalSolution out;
  out.grid = grid;
  out.U = sol.U;
  const DiscreteDispatch disc = DiscreteDispatch::make(model, h);
  Vec x = xa0;
  out.states.push_back(x);
  Vec node_cost(N);
  for (int k = 0; k < N; ++k) {
    const Vec u = sol.U.row(k).transpose();
    node_cost[k] = h * model.running_cost(x, u, grid.time(k));
    x = disc.step(x, u);
    out.states.push_back(x);
  }
  out.cost_to_go.resize(N + 1);
  out.cost_to_go[N] = model.terminal_value(x);
  for (int k = N - 1; k >= 0; --k)
    out.cost_to_go[k] = out.cost_to_go[k + 1] + node_cost[k];
  out.total = out.cost_to_go[0];
  return out;
}

MpcController::MpcController(DERModel model, MpcConfig cfg, TimeGrid grid)
    : model_(std::move(model)), cfg_(std::move(cfg)), grid_(grid) {}

Vec MpcController::control(const Vec& xa, double t) {
  const double h = grid_.dt();
  const int k0 = static_cast<int>(std::llround(t / h));
  const int win = std::max(1, static_cast<int>(std::llround(cfg_.window / h)));
  const int K = std::min(win, grid_.steps - k0);
  if (K <= 0) return Vec::Zero(model_.M);

  Mat init(K, model_.M);
  for (int r = 0; r < K; ++r) {
    const int idx = r + cfg_.control_stride;
    if (warm_.rows() == 0)
      init.row(r).setZero();
    else
      init.row(r) = warm_.row(std::min<int>(idx, warm_.rows() - 1));
  }
  const WindowSolution sol = solve_window(model_, cfg_, xa, t, K, h, init);
  warm_ = sol.U;
  total_iterations_ += sol.iterations;
  return sol.U.row(0).transpose();
}

namespace {

Vec rk4_step(const DERModel& plant, const Vec& x, const Vec& u, double t,
             double h) {
  auto F = [&](const Vec& xa, double tt) {
    Vec dx(2 * plant.M);
    for (int i = 0; i < plant.M; ++i) {
      dx[i] = -plant.alpha[i] * xa[i] - xa[plant.M + i];
      dx[plant.M + i] = u[i];
    }
    (void)tt;
    return dx;
  };
  const Vec k1 = F(x, t);
  const Vec k2 = F(x + 0.5 * h * k1, t + 0.5 * h);
  const Vec k3 = F(x + 0.5 * h * k2, t + 0.5 * h);
  const Vec k4 = F(x + h * k3, t + h);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory evaluate_policy(const DERModel& plant, const DERModel& ctrl_model,
                           const MpcConfig& cfg, const TimeGrid& grid,
                           const Vec& xa0) {
  MpcController ctrl(ctrl_model, cfg, grid);
  Trajectory traj;
  traj.grid = grid;
  const int N = grid.steps;
  const double h = grid.dt();
  traj.cost_samples.resize(N + 1);
  Vec x = xa0;
  Vec u = Vec::Zero(plant.M);
  for (int k = 0; k < N; ++k) {
    if (k % cfg.control_stride == 0) u = ctrl.control(x, grid.time(k));
    traj.x.push_back(x);
    traj.u.push_back(u);
    traj.cost_samples[k] = plant.running_cost(x, u, grid.time(k));
    x = rk4_step(plant, x, u, grid.time(k), h);
  }
  traj.x.push_back(x);
  traj.u.push_back(u);
  traj.cost_samples[N] = plant.running_cost(x, u, grid.time(N));
  traj.terminal_cost = plant.terminal_value(x);
  return traj;
}

PerformanceStats avg_performance(const DERModel& nominal, const MpcConfig& cfg,
                                 const TimeGrid& grid, double eps, int trials,
                                 double x0_box, unsigned seed,
                                 bool include_terminal) {
  std::vector<double> costs(trials);
#pragma omp parallel for schedule(dynamic)
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(seed + 1000003ull * trial);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    DERModel plant = eps > 0.0 ? perturb_model(nominal, eps, rng) : nominal;
    Vec x0(2 * nominal.M);
    for (int i = 0; i < 2 * nominal.M; ++i) x0[i] = x0_box * unit(rng);
    const Trajectory traj = evaluate_policy(plant, nominal, cfg, grid, x0);
    costs[trial] = include_terminal ? total_cost(traj)
                                    : running_cost_integral(traj);
  }
  PerformanceStats stats;
  stats.trials = trials;
  stats.min = costs[0];
  stats.max = costs[0];
  for (double c : costs) {
    stats.mean += c;
    stats.min = std::min(stats.min, c);
    stats.max = std::max(stats.max, c);
  }
  stats.mean /= trials;
  double var = 0.0;
  for (double c : costs) var += (c - stats.mean) * (c - stats.mean);
  if (trials > 1)
    stats.stderr_ = std::sqrt(var / (trials - 1) / trials);
  return stats;
}

}  // namespace qode
