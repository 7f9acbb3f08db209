#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qode/system.hpp"

namespace qode {

/// Affine-in-theta family H^theta(x,u,t) = h0(x,u,t) + theta' psi(x,u,t).
/// The offset h0 may be empty, in which case it is identically zero.
struct BasisSet {
  int dim = 0;
  std::function<Vec(const Vec& x, const Vec& u, double t)> features;
  std::function<double(const Vec& x, const Vec& u, double t)> offset;
  std::vector<int> sign_mask;  // indices whose coefficients must stay >= 0

  double offset_at(const Vec& x, const Vec& u, double t) const {
    return offset ? offset(x, u, t) : 0.0;
  }
};

/// Parameter vector with training provenance.
struct ThetaVector {
  Vec coeffs;
  nlohmann::json metadata;
};

double eval_H(const Vec& theta, const BasisSet& basis, const Vec& x,
              const Vec& u, double t);

// ---------------------------------------------------------------------------
// Inner minimization over u.

/// For classes where H is an exact quadratic in a scalar reduced input s,
/// with u = embed(s). Coefficients are recovered by probing H at three
/// points, so no per-class plumbing is needed. Requires positive curvature.
struct AnalyticScalarQuadratic {
  std::function<Vec(double s)> embed;  // empty: scalar input, u = [s]
  // Admissible range for s; the minimizer of the convex quadratic on the
  // interval is the clamped vertex.
  double s_lo = -std::numeric_limits<double>::infinity();
  double s_hi = std::numeric_limits<double>::infinity();
};

/// Exhaustive search over a uniform grid in a box; lexicographically
/// smallest grid point wins ties.
struct BoxGrid {
  Vec lo, hi;
  int points_per_axis = 41;
};

/// Degenerate strategy: the input is pinned.
struct FixedInput {
  Vec u;
};

using UMinStrategy = std::variant<AnalyticScalarQuadratic, BoxGrid, FixedInput>;

struct StrategyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GreedyResult {
  Vec u;
  double value;  // underline-H^theta(x,t) = H at the returned minimizer
};

GreedyResult greedy_u(const Vec& theta, const BasisSet& basis, const Vec& x,
                      double t, const UMinStrategy& strat);

/// Candidate inputs a strategy would consider; used by the LP builder and
/// the diagnostics to turn min_u into a finite max of affine rows.
std::vector<Vec> candidate_inputs(const UMinStrategy& strat, int input_dim);

}  // namespace qode
