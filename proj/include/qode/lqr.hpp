#pragma once

#include "qode/basis.hpp"
#include "qode/grid.hpp"

namespace qode {

/// Finite-horizon LQR instance: xdot = A x + B u,
/// c = x'Q x + u'R u, J0 = x'QT x.
struct LqrInstance {
  Mat A, B, Q, R, QT;
  double horizon = 0.0;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
};

/// Backward Riccati sweep P(t) on a grid; J*(x,t) = x'P(t)x.
struct RiccatiSolution {
  TimeGrid grid;
  std::vector<Mat> P;

  /// P(t) by linear interpolation between grid points.
  Mat at(double t) const;
};

RiccatiSolution riccati_solve(const LqrInstance& inst, const TimeGrid& grid);

double lqr_value(const RiccatiSolution& sol, const Vec& x, double t);

/// H*(x,u,t) = -sigma J* + c + J*_x . F + J*_t, with J*_t taken from the
/// Riccati right-hand side (no finite differencing).
double lqr_Hstar(const RiccatiSolution& sol, const LqrInstance& inst,
                 double sigma, const Vec& x, const Vec& u, double t);

/// Optimal feedback u* = -R^{-1} B' P(t) x.
Vec lqr_policy(const RiccatiSolution& sol, const LqrInstance& inst,
               const Vec& x, double t);

/// The instance as a generic control system, for rollouts.
ControlSystem lqr_system(const LqrInstance& inst);

/// One-feature oracle class: psi = [H*(x,u,t)], so theta = (1) reproduces the
/// oracle exactly. Used by the Q-ODE identity checks.
BasisSet lqr_oracle_basis(const RiccatiSolution& sol, const LqrInstance& inst,
                          double sigma);

/// True-feature class for scalar instances with QT = 0: a value class
/// J^theta = x^2 P(t) (theta' w(t)) whose weight functions sum to one, so
/// H* = h0 + theta' psi exactly at theta = (1, 1, 1). The running cost is
/// the offset h0, so the curvature in u is fixed for every theta.
BasisSet lqr_true_feature_basis(const RiccatiSolution& sol,
                                const LqrInstance& inst, double sigma);

}  // namespace qode
