#pragma once

#include <random>
#include <string>

#include "qode/bellman.hpp"

namespace qode {

enum class Verdict { Holds, Fails, Marginal };

struct ConditionVerdict {
  Verdict verdict = Verdict::Marginal;
  double margin = 0.0;  // condition-specific margin (see each check)
  Vec witness;          // unit-norm witness when verdict == Fails
  std::string trace;
};

std::string to_string(Verdict v);

/// Centered second moment of the on-trajectory basis samples, Eq-(30) style:
/// trapezoidal time average per trajectory, then batch mean. Symmetric PSD.
Mat covariance(const TrainingBatch& batch);

/// E3: positive-definiteness of the covariance. Margin = lambda_min /
/// lambda_max; Fails carries the minimal eigenvector.
ConditionVerdict check_E3(const Mat& sigma, double tol = 1e-9);

/// E1: are the basis samples restricted to a half space? Solved as an LP
/// (max delta s.t. v'psi >= delta, ||v||_inf <= 1) with row generation.
/// Fails(v) when some v separates all samples by more than tol * scale;
/// the threshold is relative because the basis vanishes at the horizon, so a
/// zero-margin supporting hyperplane always exists.
ConditionVerdict check_E1(const TrainingBatch& batch, double tol = 1e-4,
                          int sample_stride = 1);

/// E2: is there a nonzero v with underline-H^v_r >= (filtered H)^v_r for all
/// r? The objective g(v) = min_{j,r} [underline-H^v_r - v'Psi_r] is concave
/// and positively homogeneous; maximized over the unit sphere by multi-start
/// projected supergradient ascent. The inner min over u uses the strategy's
/// candidate set (homogeneous part only).
ConditionVerdict check_E2(const TrainingBatch& batch, double tol = 1e-7,
                          int starts = 32, unsigned seed = 0);

struct BoundednessReport {
  struct Direction {
    Vec v;
    double radius = 0.0;  // feasibility boundary along theta = omega v
    bool unbounded = false;  // feasible up to r_max
  };
  std::vector<Direction> directions;
  double r_max = 0.0;
  double tol = 0.0;
  bool all_finite() const;
};

/// Empirical boundedness probe of the feasible set Theta: bisection on the
/// feasibility boundary along random unit directions (plus any explicitly
/// supplied directions, e.g. an E2 witness).
BoundednessReport probe_boundedness(const TrainingBatch& batch, double tol,
                                    int n_dirs, double r_max,
                                    unsigned seed = 0,
                                    const std::vector<Vec>& extra_dirs = {});

}  // namespace qode
