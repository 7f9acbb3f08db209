#include "qode/bellman.hpp"

namespace qode {

Vec bellman_error(const Vec& theta, const Trajectory& traj,
                  const FilteredSignals& sig, const BasisSet& basis,
                  const UMinStrategy& strat) {
  const int n = traj.grid.points();
  Vec b(n);
  for (int k = 0; k < n; ++k) {
    const int fwd = n - 1 - k;
    const double t = traj.grid.time(fwd);
    const double hmin = greedy_u(theta, basis, traj.x[fwd], t, strat).value;
    b[k] = -hmin - sig.terminal_term[k] + sig.psi_filt.row(k).dot(theta) +
           sig.h0_filt[k] - sig.cost_filt[k];
  }
  return b;
}

double constraint_value_single(const Vec& theta, const Trajectory& traj,
                               const FilteredSignals& sig,
                               const BasisSet& basis,
                               const UMinStrategy& strat) {
  const Vec b = bellman_error(theta, traj, sig, basis, strat);
  const Vec hinge = b.cwiseMax(0.0);
  return trapezoid(hinge, traj.grid) / traj.grid.horizon;
}

double constraint_value(const Vec& theta, const TrainingBatch& batch) {
  if (batch.trajectories.empty())
    throw std::invalid_argument("constraint_value: empty batch");
  double acc = 0.0;
  for (int j = 0; j < batch.size(); ++j)
    acc += constraint_value_single(theta, batch.trajectories[j],
                                   batch.signals[j], batch.basis,
                                   batch.strategy);
  return acc / batch.size();
}

bool is_feasible(const Vec& theta, const TrainingBatch& batch, double tol,
                 ConstraintMode mode) {
  if (mode == ConstraintMode::Pooled)
    return constraint_value(theta, batch) <= tol;
  for (int j = 0; j < batch.size(); ++j) {
    if (constraint_value_single(theta, batch.trajectories[j], batch.signals[j],
                                batch.basis, batch.strategy) > tol)
      return false;
  }
  return true;
}

double default_tol(const TrainingBatch& batch) {
  double acc = 0.0;
  long count = 0;
  for (const auto& sig : batch.signals) {
    acc += sig.cost_filt.sum();
    count += sig.cost_filt.size();
  }
  return 1e-3 * (count > 0 ? acc / count : 0.0);
}

}  // namespace qode
