#pragma once

#include "qode/bellman.hpp"
#include "qode/lp.hpp"

namespace qode {

/// Weighted sample measure for the training objective <mu, H^theta>.
struct MuMeasure {
  struct Sample {
    Vec x, u;
    double t;
    double w;
  };
  std::vector<Sample> samples;

  /// Uniform empirical measure over every (x_t, u_t, t) sample in the batch
  /// (optionally strided).
  static MuMeasure uniform_from(const TrainingBatch& batch, int stride = 1);
};

/// Finite affine representation of the relaxed training program: per grid
/// point the filtered signals and a candidate set for the inner minimization,
/// so that -underline-H^theta becomes a max over affine rows.
struct ConstraintPoint {
  double weight = 0.0;      // trapezoid weight / T
  double const_term = 0.0;  // -terminal_term + h0filt - C at this point
  Vec psi_filt_row;         // filtered features at this point
  Vec x;                    // forward state, for on-the-fly greedy candidates
  double t = 0.0;           // forward time
  struct Candidate {
    Vec psi;
    double h0;
  };
  std::vector<Candidate> candidates;

  /// Hinge argument using the stored candidate set only.
  double value(const Vec& theta) const;
};

struct ConstraintSet {
  int dim = 0;
  double horizon = 0.0;
  BasisSet basis;
  UMinStrategy strategy;
  std::vector<std::vector<ConstraintPoint>> per_traj;

  /// Exact hinge argument: stored candidates plus the greedy minimizer at
  /// theta. Appends the greedy candidate when `grow` is non-null.
  double exact_value(int j, int k, const Vec& theta, bool* grew = nullptr);
};

ConstraintSet build_constraint_set(const TrainingBatch& batch, int stride = 1);

/// Explicit epigraph LP over (theta+, theta-, slacks) covering every stored
/// point and candidate. Used directly for small instances and by tests; the
/// trainer uses an incrementally generated master of the same row structure.
struct CvxqLP {
  lp::Problem lp;
  int dim = 0;
  std::vector<int> neg_col;  // column of theta- per coefficient, -1 if none
  int slack_begin = 0;

  Vec extract_theta(const Vec& x) const;
};

CvxqLP build_lp(const ConstraintSet& cs, const MuMeasure& mu, double tol,
                ConstraintMode mode = ConstraintMode::PerTrajectory);

enum class CvxqStatus { Optimal, Unbounded, IterLimit };

struct CvxqResult {
  CvxqStatus status = CvxqStatus::IterLimit;
  Vec theta;
  double objective = 0.0;
  Vec ray;  // recession direction when Unbounded
  int rounds = 0;
  long lp_iterations = 0;
  int master_rows = 0;
  // Residual of the exact per-trajectory constraint at the returned theta
  // (max over trajectories); zero-ish when the generation loop closed the
  // gap, positive when it stopped at the pass limit.
  double exact_excess = 0.0;
};

struct CvxqOptions {
  double tol = -1.0;  // < 0: scale-aware default from the batch
  int constraint_stride = 1;
  int max_rounds = 200;
  int max_added_per_traj = 80;
  // Box on each split coefficient column; keeps every master LP bounded so
  // recession directions surface as capped coordinates instead of rays.
  double theta_cap = 1e7;
  // When positive, stop after this many candidate-regeneration passes (or
  // once theta stops moving between passes) and return the visited iterate
  // with the smallest exact constraint residual. Every returned iterate is
  // feasible for the generated candidate rows; high-dimensional classes
  // rarely close the gap to the semi-infinite constraint exactly.
  int max_passes = 0;
  double theta_move_tol = 1e-6;
  ConstraintMode mode = ConstraintMode::PerTrajectory;
  lp::SolveOptions lp_opts;
};

/// Solve the relaxed convex Q-learning program by constraint generation:
/// grow hinge rows (and greedy candidates) until the LP optimum is feasible
/// for the exact constraint, or certify an unbounded recession direction.
CvxqResult solve_cvxq(const TrainingBatch& batch, const MuMeasure& mu,
                      const CvxqOptions& opts = {});

}  // namespace qode
