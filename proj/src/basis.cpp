#include "qode/basis.hpp"

#include <algorithm>

namespace qode {

double eval_H(const Vec& theta, const BasisSet& basis, const Vec& x,
              const Vec& u, double t) {
  const Vec psi = basis.features(x, u, t);
  if (psi.size() != basis.dim || theta.size() != basis.dim)
    throw std::invalid_argument("eval_H: dimension mismatch");
  return basis.offset_at(x, u, t) + theta.dot(psi);
}

namespace {

GreedyResult greedy_analytic(const Vec& theta, const BasisSet& basis,
                             const Vec& x, double t,
                             const AnalyticScalarQuadratic& strat) {
  auto embed = [&](double s) -> Vec {
    if (strat.embed) return strat.embed(s);
    Vec u(1);
    u[0] = s;
    return u;
  };
  // Recover H(s) = a s^2 + b s + c from three probes; exact when H is
  // quadratic in the reduced scalar input.
  const double h0 = eval_H(theta, basis, x, embed(0.0), t);
  const double hp = eval_H(theta, basis, x, embed(1.0), t);
  const double hm = eval_H(theta, basis, x, embed(-1.0), t);
  const double a = 0.5 * (hp + hm) - h0;
  const double b = 0.5 * (hp - hm);
  if (!(a > 0.0))
    throw StrategyError("AnalyticScalarQuadratic: nonpositive curvature");
  const double s_star =
      std::clamp(-b / (2.0 * a), strat.s_lo, strat.s_hi);
  GreedyResult res;
  res.u = embed(s_star);
  res.value = eval_H(theta, basis, x, res.u, t);
  return res;
}

GreedyResult greedy_box(const Vec& theta, const BasisSet& basis, const Vec& x,
                        double t, const BoxGrid& strat) {
  const int m = static_cast<int>(strat.lo.size());
  if (strat.points_per_axis < 2)
    throw StrategyError("BoxGrid: need at least 2 points per axis");
  std::vector<int> idx(m, 0);
  Vec u(m);
  GreedyResult best;
  best.value = std::numeric_limits<double>::infinity();
  bool done = false;
  while (!done) {
    for (int i = 0; i < m; ++i)
      u[i] = strat.lo[i] + (strat.hi[i] - strat.lo[i]) * idx[i] /
                               (strat.points_per_axis - 1);
    const double v = eval_H(theta, basis, x, u, t);
    // Strict improvement keeps the lexicographically smallest minimizer.
    if (v < best.value) {
      best.value = v;
      best.u = u;
    }
    done = true;
    for (int i = m - 1; i >= 0; --i) {
      if (++idx[i] < strat.points_per_axis) {
        done = false;
        break;
      }
      idx[i] = 0;
    }
  }
  return best;
}

}  // namespace

GreedyResult greedy_u(const Vec& theta, const BasisSet& basis, const Vec& x,
                      double t, const UMinStrategy& strat) {
  return std::visit(
      [&](const auto& s) -> GreedyResult {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, AnalyticScalarQuadratic>)
          return greedy_analytic(theta, basis, x, t, s);
        else if constexpr (std::is_same_v<S, BoxGrid>)
          return greedy_box(theta, basis, x, t, s);
        else
          return GreedyResult{s.u, eval_H(theta, basis, x, s.u, t)};
      },
      strat);
}

std::vector<Vec> candidate_inputs(const UMinStrategy& strat, int input_dim) {
  std::vector<Vec> out;
  if (const auto* box = std::get_if<BoxGrid>(&strat)) {
    const int m = static_cast<int>(box->lo.size());
    std::vector<int> idx(m, 0);
    bool done = false;
    while (!done) {
      Vec u(m);
      for (int i = 0; i < m; ++i)
        u[i] = box->lo[i] +
               (box->hi[i] - box->lo[i]) * idx[i] / (box->points_per_axis - 1);
      out.push_back(u);
      done = true;
      for (int i = m - 1; i >= 0; --i) {
        if (++idx[i] < box->points_per_axis) {
          done = false;
          break;
        }
        idx[i] = 0;
      }
    }
  } else if (const auto* fixed = std::get_if<FixedInput>(&strat)) {
    out.push_back(fixed->u);
  }
  (void)input_dim;  // Analytic strategies generate candidates via greedy_u.
  return out;
}

}  // namespace qode
