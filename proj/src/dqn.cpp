#include "qode/dqn.hpp"

#include <Eigen/Cholesky>

namespace qode {

Vec frozen_bellman(const Vec& theta, const Vec& theta_n, const Trajectory& traj,
                   const FilteredSignals& sig, const BasisSet& basis,
                   const UMinStrategy& strat) {
  const int n = traj.grid.points();
  Vec b(n);
  for (int k = 0; k < n; ++k) {
    const int fwd = n - 1 - k;
    const double t = traj.grid.time(fwd);
    const double hmin = greedy_u(theta_n, basis, traj.x[fwd], t, strat).value;
    b[k] = -hmin - sig.terminal_term[k] + sig.psi_filt.row(k).dot(theta) +
           sig.h0_filt[k] - sig.cost_filt[k];
  }
  return b;
}

namespace {

// Frozen part q_r of B^{theta'|theta}_r = q_r + theta'' Psi_r, per trajectory.
Vec frozen_part(const Vec& theta_n, const Trajectory& traj,
                const FilteredSignals& sig, const BasisSet& basis,
                const UMinStrategy& strat) {
  const int n = traj.grid.points();
  Vec q(n);
  for (int k = 0; k < n; ++k) {
    const int fwd = n - 1 - k;
    const double t = traj.grid.time(fwd);
    const double hmin = greedy_u(theta_n, basis, traj.x[fwd], t, strat).value;
    q[k] = -hmin - sig.terminal_term[k] + sig.h0_filt[k] - sig.cost_filt[k];
  }
  return q;
}

// Batch-averaged trapezoid moments: A = <Psi, Psi'>, b0 = <Psi, q>.
void inner_product_moments(const Vec& theta_n, const TrainingBatch& batch,
                           Mat* A, Vec* b0) {
  const int d = batch.basis.dim;
  *A = Mat::Zero(d, d);
  *b0 = Vec::Zero(d);
  for (int j = 0; j < batch.size(); ++j) {
    const auto& traj = batch.trajectories[j];
    const auto& sig = batch.signals[j];
    const Vec q = frozen_part(theta_n, traj, sig, batch.basis, batch.strategy);
    const int n = traj.grid.points();
    const double h = traj.grid.dt();
    for (int k = 0; k < n; ++k) {
      const double w = (k == 0 || k == n - 1) ? 0.5 * h : h;
      const Vec psi = sig.psi_filt.row(k).transpose();
      A->noalias() += w * psi * psi.transpose();
      b0->noalias() += (w * q[k]) * psi;
    }
  }
  *A /= batch.size();
  *b0 /= batch.size();
}

}  // namespace

Vec dqn_step_exact(const DqnState& state, const TrainingBatch& batch,
                   double alpha) {
  Mat A;
  Vec b0;
  inner_product_moments(state.theta, batch, &A, &b0);
  const int d = batch.basis.dim;
  Mat lhs = A + Mat::Identity(d, d) / alpha;
  const Vec rhs = state.theta / alpha - b0;
  const Vec next = lhs.ldlt().solve(rhs);
  if (!next.allFinite())
    throw std::runtime_error("dqn_step_exact: singular system");
  return next;
}

Vec dqn_step_gradient(const DqnState& state, const TrainingBatch& batch,
                      double alpha) {
  Mat A;
  Vec b0;
  inner_product_moments(state.theta, batch, &A, &b0);
  return state.theta - alpha * (b0 + A * state.theta);
}

double bellman_l2_norm(const Vec& theta, const TrainingBatch& batch) {
  double acc = 0.0;
  for (int j = 0; j < batch.size(); ++j) {
    const Vec b = bellman_error(theta, batch.trajectories[j], batch.signals[j],
                                batch.basis, batch.strategy);
    const Vec sq = b.cwiseProduct(b);
    acc += trapezoid(sq, batch.trajectories[j].grid);
  }
  return std::sqrt(acc / batch.size());
}

DqnTrace train_dqn(const DqnConfig& cfg, const TrainingBatch& batch,
                   const Vec& theta0) {
  DqnTrace trace;
  DqnState state{theta0, 0};
  const double init_scale = 1.0 + theta0.norm();
  for (int n = 0; n < cfg.max_iterations; ++n) {
    const double alpha = cfg.alpha0 / (1.0 + n / cfg.n0);
    const Vec next = cfg.exact_step ? dqn_step_exact(state, batch, alpha)
                                    : dqn_step_gradient(state, batch, alpha);
    const double step = (next - state.theta).norm();
    state.theta = next;
    state.iteration = n + 1;
    trace.step_norm.push_back(step);
    trace.bellman_norm.push_back(bellman_l2_norm(state.theta, batch));
    trace.iterations = n + 1;
    if (state.theta.norm() > cfg.divergence_factor * init_scale) {
      trace.diverged = true;
      break;
    }
    if (cfg.delta_tol > 0.0 && step < cfg.delta_tol) break;
  }
  trace.theta = state.theta;
  return trace;
}

}  // namespace qode
