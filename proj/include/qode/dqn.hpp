#pragma once

#include "qode/bellman.hpp"

namespace qode {

/// Bellman error with the greedy term frozen at theta_n:
///   -underline-H^{theta_n} - terminal + theta' Psi + h0filt - C.
/// Coincides with bellman_error when theta == theta_n.
Vec frozen_bellman(const Vec& theta, const Vec& theta_n, const Trajectory& traj,
                   const FilteredSignals& sig, const BasisSet& basis,
                   const UMinStrategy& strat);

struct DqnState {
  Vec theta;
  int iteration = 0;
};

/// One exact proximal step: solves the linear stationarity condition
///   0 = <B^{theta'|theta}, Psi> + (theta' - theta)/alpha
/// for theta'. The inner product is per-trajectory then batch-averaged.
Vec dqn_step_exact(const DqnState& state, const TrainingBatch& batch,
                   double alpha);

/// Explicit gradient approximation: theta - alpha <B^{theta|theta}, Psi>.
Vec dqn_step_gradient(const DqnState& state, const TrainingBatch& batch,
                      double alpha);

struct DqnConfig {
  double alpha0 = 0.05;
  double n0 = 100.0;   // schedule alpha_n = alpha0 / (1 + n / n0)
  int max_iterations = 1000;
  double delta_tol = 0.0;  // stop when ||theta_{n+1} - theta_n|| below this
  bool exact_step = true;
  double divergence_factor = 1e6;
};

struct DqnTrace {
  Vec theta;  // final iterate
  std::vector<double> bellman_norm;  // L2 norm of B per iteration
  std::vector<double> step_norm;     // ||theta_{n+1} - theta_n||
  bool diverged = false;
  int iterations = 0;
};

DqnTrace train_dqn(const DqnConfig& cfg, const TrainingBatch& batch,
                   const Vec& theta0);

/// Batch-averaged L2 norm of the (unfrozen) Bellman error at theta.
double bellman_l2_norm(const Vec& theta, const TrainingBatch& batch);

}  // namespace qode
