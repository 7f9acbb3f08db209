#include "qode/lqr.hpp"

#include <Eigen/Cholesky>

#include "qode/integrate.hpp"

namespace qode {

namespace {

// Backward derivative: -Pdot = A'P + PA - P S P + Q with S = B R^{-1} B'.
Mat riccati_rhs_backward(const LqrInstance& inst, const Mat& S, const Mat& P) {
  return inst.A.transpose() * P + P * inst.A - P * S * P + inst.Q;
}

Mat gain_S(const LqrInstance& inst) {
  return inst.B * inst.R.ldlt().solve(inst.B.transpose());
}

}  // namespace

Mat RiccatiSolution::at(double t) const {
  if (t < -1e-12 || t > grid.horizon * (1.0 + 1e-12))
    throw std::out_of_range("RiccatiSolution: t outside [0, T]");
  const double pos = std::clamp(t / grid.dt(), 0.0, double(grid.steps));
  const int k = std::min(static_cast<int>(pos), grid.steps - 1);
  const double w = pos - k;
  return (1.0 - w) * P[k] + w * P[k + 1];
}

RiccatiSolution riccati_solve(const LqrInstance& inst, const TimeGrid& grid) {
  const Mat S = gain_S(inst);
  const double h = grid.dt();
  RiccatiSolution sol;
  sol.grid = grid;
  sol.P.resize(grid.points());
  sol.P[grid.steps] = inst.QT;

  // Integrate dP/ds = rhs(P) in reversed time s = T - t.
  Mat P = inst.QT;
  for (int k = grid.steps; k > 0; --k) {
    const Mat k1 = riccati_rhs_backward(inst, S, P);
    const Mat k2 = riccati_rhs_backward(inst, S, P + 0.5 * h * k1);
    const Mat k3 = riccati_rhs_backward(inst, S, P + 0.5 * h * k2);
    const Mat k4 = riccati_rhs_backward(inst, S, P + h * k3);
    P += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    P = 0.5 * (P + P.transpose()).eval();
    if (!P.allFinite()) throw DivergenceError(grid.time(k - 1));
    sol.P[k - 1] = P;
  }
  return sol;
}

double lqr_value(const RiccatiSolution& sol, const Vec& x, double t) {
  return x.dot(sol.at(t) * x);
}

double lqr_Hstar(const RiccatiSolution& sol, const LqrInstance& inst,
                 double sigma, const Vec& x, const Vec& u, double t) {
  const Mat P = sol.at(t);
  const Mat S = gain_S(inst);
  const Mat Pdot = -riccati_rhs_backward(inst, S, P);
  const double cost = x.dot(inst.Q * x) + u.dot(inst.R * u);
  const double Jx_dot_F = 2.0 * (P * x).dot(inst.A * x + inst.B * u);
  const double Jt = x.dot(Pdot * x);
  return -sigma * x.dot(P * x) + cost + Jx_dot_F + Jt;
}

Vec lqr_policy(const RiccatiSolution& sol, const LqrInstance& inst,
               const Vec& x, double t) {
  return -inst.R.ldlt().solve(inst.B.transpose() * (sol.at(t) * x));
}

ControlSystem lqr_system(const LqrInstance& inst) {
  ControlSystem sys;
  sys.state_dim = inst.state_dim();
  sys.input_dim = inst.input_dim();
  sys.dynamics = [inst](const Vec& x, const Vec& u, double) -> Vec {
    return inst.A * x + inst.B * u;
  };
  sys.running_cost = [inst](const Vec& x, const Vec& u, double) {
    return x.dot(inst.Q * x) + u.dot(inst.R * u);
  };
  sys.terminal_cost = [inst](const Vec& x) { return x.dot(inst.QT * x); };
  return sys;
}

BasisSet lqr_oracle_basis(const RiccatiSolution& sol, const LqrInstance& inst,
                          double sigma) {
  BasisSet basis;
  basis.dim = 1;
  basis.features = [sol, inst, sigma](const Vec& x, const Vec& u,
                                      double t) -> Vec {
    Vec psi(1);
    psi[0] = lqr_Hstar(sol, inst, sigma, x, u, t);
    return psi;
  };
  return basis;
}

BasisSet lqr_true_feature_basis(const RiccatiSolution& sol,
                                const LqrInstance& inst, double sigma) {
  if (inst.state_dim() != 1 || inst.input_dim() != 1)
    throw std::invalid_argument("lqr_true_feature_basis: scalar instances only");
  if (inst.QT(0, 0) != 0.0)
    throw std::invalid_argument("lqr_true_feature_basis: needs QT = 0");
  const double a = inst.A(0, 0);
  const double b = inst.B(0, 0);
  const double q = inst.Q(0, 0);
  const double rr = inst.R(0, 0);
  const double T = inst.horizon;
  const Mat S = gain_S(inst);

  // Value class J^theta(x,t) = x^2 P(t) (theta' w(t)) with weights
  // w1 = s/T, w2 = (s/T)^2, w3 = 1 - w1 - w2 at s = T - t. The weights sum
  // to one, so theta = (1,1,1) reproduces the oracle value and H exactly.
  // The running cost sits in the offset: the curvature of H in u is fixed
  // at R for every theta, which keeps the learnable part honest (no
  // coefficient can flatten the input penalty).
  BasisSet basis;
  basis.dim = 3;
  basis.offset = [q, rr](const Vec& x, const Vec& u, double) {
    return q * x[0] * x[0] + rr * u[0] * u[0];
  };
  basis.features = [sol, inst, S, a, b, sigma, T](const Vec& x, const Vec& u,
                                                  double t) -> Vec {
    const double P = sol.at(t)(0, 0);
    const double Pdot = -riccati_rhs_backward(inst, S, sol.at(t))(0, 0);
    const double s = T - t;
    const double w1 = s / T, w2 = w1 * w1, w3 = 1.0 - w1 - w2;
    const double w1d = -1.0 / T, w2d = -2.0 * s / (T * T), w3d = -w1d - w2d;
    const double gen = Pdot + (2.0 * a - sigma) * P;
    const double mix = 2.0 * b * P * x[0] * u[0];
    const double xx = x[0] * x[0];
    Vec psi(3);
    psi[0] = xx * (gen * w1 + P * w1d) + mix * w1;
    psi[1] = xx * (gen * w2 + P * w2d) + mix * w2;
    psi[2] = xx * (gen * w3 + P * w3d) + mix * w3;
    return psi;
  };
  return basis;
}

}  // namespace qode
