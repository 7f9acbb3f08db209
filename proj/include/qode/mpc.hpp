#pragma once

#include "qode/dispatch.hpp"

namespace qode {

/// Exact one-step transition of the dispatch dynamics under a zero-order-hold
/// input: per class, z' = z + h u and x' = E x - P1 z - P2 u with
/// E = exp(-alpha h), P1 = (1 - E)/alpha, P2 = (h - P1)/alpha.
struct DiscreteDispatch {
  int M = 0;
  double h = 0.0;
  Vec E, P1, P2;

  static DiscreteDispatch make(const DERModel& model, double h);
  Vec step(const Vec& xa, const Vec& u) const;
  /// Adjoint of the step: pulls a gradient at (x', z') back to (x, z) and u.
  void adjoint(const Vec& lambda, Vec* d_xa, Vec* d_u) const;
};

enum class TerminalKind { Zero, Fixed, Learned };

struct MpcConfig {
  double window = 24.0;  // receding horizon tau, hours
  TerminalKind terminal = TerminalKind::Fixed;
  Vec theta;             // learned coefficients (TerminalKind::Learned)
  DispatchBasis basis;   // value basis for the learned terminal
  int control_stride = 1;  // re-plan every this many grid steps
  int max_iters = 400;
  double grad_tol = 1e-7;
};

struct WindowSolution {
  Mat U;  // K x M inputs, one row per step
  double cost = 0.0;
  int iterations = 0;
};

/// Direct transcription of one planning window: K zero-order-hold inputs,
/// rectangle-rule running cost, terminal from the config (fixed J0 is always
/// used when the window is truncated at the horizon). Solved by projected-free
/// Barzilai-Borwein descent with Armijo backtracking; the problem is convex.
WindowSolution solve_window(const DERModel& model, const MpcConfig& cfg,
                            const Vec& xa0, double t0, int steps, double h,
                            const Mat& u_init);

struct OptimalSolution {
  TimeGrid grid;
  Mat U;
  std::vector<Vec> states;  // N+1 nodes of the discrete rollout
  double total = 0.0;
  Vec cost_to_go;  // tail cost J*(x*_k, t_k) along the solution
};

/// Full-horizon open-loop optimum via a single window covering [0, T].
OptimalSolution solve_dispatch_optimal(const DERModel& model,
                                       const TimeGrid& grid, const Vec& xa0,
                                       int max_iters = 2000,
                                       double grad_tol = 1e-9);

/// Receding-horizon controller. Stateful: windows are warm-started from the
/// shifted previous plan.
class MpcController {
 public:
  MpcController(DERModel model, MpcConfig cfg, TimeGrid grid);
  Vec control(const Vec& xa, double t);
  int total_iterations() const { return total_iterations_; }

 private:
  DERModel model_;
  MpcConfig cfg_;
  TimeGrid grid_;
  Mat warm_;
  int total_iterations_ = 0;
};

/// Closed-loop rollout of a receding-horizon policy on a (possibly different)
/// plant model. Running cost is evaluated on the plant.
Trajectory evaluate_policy(const DERModel& plant, const DERModel& ctrl_model,
                           const MpcConfig& cfg, const TimeGrid& grid,
                           const Vec& xa0);

struct PerformanceStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  double min = 0.0;
  double max = 0.0;
  int trials = 0;
};

/// Mean closed-loop running cost over trials with leakage perturbed by eps
/// and initial conditions drawn from [-x0_box, x0_box]^{2M}. The controller
/// always plans with the nominal model; the plant is perturbed. The terminal
/// cost is excluded unless include_terminal is set.
PerformanceStats avg_performance(const DERModel& nominal, const MpcConfig& cfg,
                                 const TimeGrid& grid, double eps, int trials,
                                 double x0_box, unsigned seed,
                                 bool include_terminal = false);

}  // namespace qode
