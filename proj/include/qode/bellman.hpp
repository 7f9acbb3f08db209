#pragma once

#include "qode/filters.hpp"

namespace qode {

/// Per-trajectory data shared by training, diagnostics and the LP builder.
struct TrainingBatch {
  BasisSet basis;
  UMinStrategy strategy;
  double sigma = 0.0;
  double tol = 0.0;  // relaxed-constraint tolerance
  std::vector<Trajectory> trajectories;
  std::vector<FilteredSignals> signals;

  const TimeGrid& grid() const { return trajectories.front().grid; }
  int size() const { return static_cast<int>(trajectories.size()); }
};

/// Bellman error sequence B^theta_r along one trajectory:
///   -underline-H^theta(x_{T-r}, T-r) - sigma e^{-sigma r} J0(x_T)
///   + theta' Psi_r + h0filt_r - C_r.
Vec bellman_error(const Vec& theta, const Trajectory& traj,
                  const FilteredSignals& sig, const BasisSet& basis,
                  const UMinStrategy& strat);

/// Single-trajectory relaxed-constraint value (1/T) integral of [B]_+.
double constraint_value_single(const Vec& theta, const Trajectory& traj,
                               const FilteredSignals& sig,
                               const BasisSet& basis,
                               const UMinStrategy& strat);

/// Batch aggregate: mean over trajectories of the single values.
double constraint_value(const Vec& theta, const TrainingBatch& batch);

/// Membership test for the relaxed feasible set Theta.
/// Mode: per-trajectory constraints (every trajectory within Tol) or pooled
/// (batch mean within Tol). Per-trajectory is the default used in training.
enum class ConstraintMode { PerTrajectory, Pooled };

bool is_feasible(const Vec& theta, const TrainingBatch& batch, double tol,
                 ConstraintMode mode = ConstraintMode::PerTrajectory);

/// Scale-aware default tolerance: 1e-3 times the batch mean of the filtered
/// cost signal.
double default_tol(const TrainingBatch& batch);

}  // namespace qode
