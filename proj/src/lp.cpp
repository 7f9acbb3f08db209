#include "qode/lp.hpp"
#include <cstdio>
#include <cstdlib>

#include <cmath>
#include <limits>
#include <ostream>

namespace qode::lp {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Tableau {
  RowMat T;                // m x (ncols + 1), last column = rhs
  Vec red;                 // reduced costs c_j - z_j, length ncols
  std::vector<int> basis;  // basic variable per row
  int n = 0, m = 0, ncols = 0, n_art = 0;

  double& rhs(int i) { return T(i, ncols); }
};

// Eliminate the pivot column from all rows and the reduced-cost row.
void pivot(Tableau& tb, int row, int col) {
  tb.T.row(row) /= tb.T(row, col);
  for (int i = 0; i < tb.m; ++i) {
    if (i == row) continue;
    const double f = tb.T(i, col);
    if (f != 0.0) tb.T.row(i) -= f * tb.T.row(row);
  }
  const double fr = tb.red[col];
  if (fr != 0.0)
    tb.red -= fr * tb.T.row(row).head(tb.ncols).transpose();
  tb.basis[row] = col;
}

// Recompute reduced costs for the cost vector `cost` (length ncols).
void rebuild_reduced(Tableau& tb, const Vec& cost) {
  tb.red = cost;
  for (int i = 0; i < tb.m; ++i) {
    const double cb = cost[tb.basis[i]];
    if (cb != 0.0) tb.red -= cb * tb.T.row(i).head(tb.ncols).transpose();
  }
}

double basic_objective(const Tableau& tb, const Vec& cost) {
  double v = 0.0;
  for (int i = 0; i < tb.m; ++i) v += cost[tb.basis[i]] * tb.T(i, tb.ncols);
  return v;
}

enum class StepResult { Pivoted, Optimal, Unbounded };

StepResult simplex_step(Tableau& tb, bool bland, bool allow_artificial,
                        const SolveOptions& opts, int* unbounded_col) {
  const int art_begin = tb.ncols - tb.n_art;
  int enter = -1;
  double best = -opts.pivot_eps;
  for (int j = 0; j < tb.ncols; ++j) {
    if (!allow_artificial && j >= art_begin) continue;
    if (tb.red[j] < best) {
      enter = j;
      if (bland) break;
      best = tb.red[j];
    }
  }
  if (enter < 0) return StepResult::Optimal;

  int leave = -1;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i < tb.m; ++i) {
    const double a = tb.T(i, enter);
    if (a <= opts.pivot_eps) continue;
    const double ratio = tb.T(i, tb.ncols) / a;
    const bool tie = ratio < best_ratio + 1e-12 + 1e-9 * std::abs(best_ratio);
    if (ratio < best_ratio - 1e-12) {
      best_ratio = ratio;
      leave = i;
    } else if (tie && leave >= 0) {
      // Among ties take the numerically largest pivot (Bland mode keeps the
      // index rule so the anti-cycling guarantee survives).
      if (bland ? tb.basis[i] < tb.basis[leave]
                : a > tb.T(leave, enter)) {
        best_ratio = std::min(best_ratio, ratio);
        leave = i;
      }
    }
  }
  if (leave < 0) {
    *unbounded_col = enter;
    return StepResult::Unbounded;
  }
  pivot(tb, leave, enter);
  return StepResult::Pivoted;
}

// Run until optimal/unbounded. Degenerate stalls switch to Bland's rule,
// which is slow but cannot cycle; once the objective moves again the fast
// Dantzig pricing is restored.
StepResult run_simplex(Tableau& tb, const Vec& cost, bool allow_artificial,
                       const SolveOptions& opts, int* iters,
                       int* unbounded_col) {
  bool bland = false;
  int stall = 0;
  double last_obj = basic_objective(tb, cost);
  const int stall_limit = 50 + (tb.m + tb.ncols) / 8;
  while (*iters < opts.max_iterations) {
    const StepResult r =
        simplex_step(tb, bland, allow_artificial, opts, unbounded_col);
    if (r != StepResult::Pivoted) return r;
    ++*iters;
    const double obj = basic_objective(tb, cost);
    if (getenv("QODE_LP_DEBUG") && *iters % 10000 == 0)
      fprintf(stderr, "lp iter=%d obj=%.12g stall=%d bland=%d m=%d ncols=%d\n",
              *iters, obj, stall, (int)bland, tb.m, tb.ncols);
    if (obj < last_obj - 1e-12) {
      last_obj = obj;
      stall = 0;
      bland = false;
    } else if (++stall > stall_limit) {
      bland = true;
    }
  }
  return StepResult::Optimal;  // iteration limit; caller checks count
}

}  // namespace

Solution solve(const Problem& prob, const SolveOptions& opts) {
  const int n = prob.num_vars;
  const int m = prob.num_rows();
  Solution sol;

  // Power-of-two equilibration: scale rows to unit max coefficient, then
  // columns likewise via the substitution x_j = x'_j / col_scale_j. Badly
  // mixed magnitudes otherwise blow the dense tableau up within a few
  // hundred pivots.
  std::vector<Vec> rows(m);
  Vec rhs(m);
  for (int i = 0; i < m; ++i) {
    const double mx = prob.rows[i].cwiseAbs().maxCoeff();
    const double r = mx > 0.0 ? std::exp2(std::round(std::log2(mx))) : 1.0;
    rows[i] = prob.rows[i] / r;
    rhs[i] = prob.rhs[i] / r;
  }
  Vec col_scale = Vec::Ones(n);
  for (int j = 0; j < n; ++j) {
    double mx = 0.0;
    for (int i = 0; i < m; ++i) mx = std::max(mx, std::abs(rows[i][j]));
    if (mx > 0.0) col_scale[j] = std::exp2(std::round(std::log2(mx)));
  }
  for (int i = 0; i < m; ++i) rows[i].array() /= col_scale.array();

  // Count artificials (rows with negative rhs).
  int n_art = 0;
  for (int i = 0; i < m; ++i)
    if (rhs[i] < 0.0) ++n_art;

  Tableau tb;
  tb.n = n;
  tb.m = m;
  tb.n_art = n_art;
  tb.ncols = n + m + n_art;
  tb.T = RowMat::Zero(m, tb.ncols + 1);
  tb.basis.resize(m);

  int art = 0;
  for (int i = 0; i < m; ++i) {
    const double sgn = rhs[i] < 0.0 ? -1.0 : 1.0;
    tb.T.row(i).head(n) = sgn * rows[i].transpose();
    tb.T(i, n + i) = sgn;  // slack
    tb.T(i, tb.ncols) = sgn * rhs[i];
    if (sgn < 0.0) {
      tb.T(i, n + m + art) = 1.0;
      tb.basis[i] = n + m + art;
      ++art;
    } else {
      tb.basis[i] = n + i;
    }
  }

  int iters = 0;
  int unbounded_col = -1;

  if (n_art > 0) {
    Vec phase1 = Vec::Zero(tb.ncols);
    phase1.tail(n_art).setOnes();
    rebuild_reduced(tb, phase1);
    run_simplex(tb, phase1, true, opts, &iters, &unbounded_col);
    const double infeas = basic_objective(tb, phase1);
    if (infeas > opts.feas_eps * (1.0 + std::abs(infeas))) {
      sol.status = Status::Infeasible;
      sol.iterations = iters;
      // Report the row whose artificial is still basic with largest value.
      double worst = 0.0;
      for (int i = 0; i < m; ++i) {
        if (tb.basis[i] >= n + m && tb.T(i, tb.ncols) > worst) {
          worst = tb.T(i, tb.ncols);
          sol.most_violated_row = i;
        }
      }
      return sol;
    }
    // Pivot remaining basic artificials (at zero) out where possible.
    for (int i = 0; i < m; ++i) {
      if (tb.basis[i] < n + m) continue;
      for (int j = 0; j < n + m; ++j) {
        if (std::abs(tb.T(i, j)) > 1e-7) {
          tb.red.setZero();  // pivot() adjusts red; values irrelevant here
          pivot(tb, i, j);
          break;
        }
      }
    }
  }

  Vec cost = Vec::Zero(tb.ncols);
  cost.head(n) = prob.c.cwiseQuotient(col_scale);
  rebuild_reduced(tb, cost);
  const StepResult r = run_simplex(tb, cost, false, opts, &iters, &unbounded_col);
  sol.iterations = iters;
  if (iters >= opts.max_iterations) {
    sol.status = Status::IterLimit;
    return sol;
  }
  if (r == StepResult::Unbounded) {
    sol.status = Status::Unbounded;
    Vec ray = Vec::Zero(n);
    if (unbounded_col < n) ray[unbounded_col] = 1.0;
    for (int i = 0; i < m; ++i)
      if (tb.basis[i] < n) ray[tb.basis[i]] = -tb.T(i, unbounded_col);
    sol.ray = ray.cwiseQuotient(col_scale);
    return sol;
  }
  sol.status = Status::Optimal;
  sol.x = Vec::Zero(n);
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < n) sol.x[tb.basis[i]] = tb.T(i, tb.ncols);
  sol.x = sol.x.cwiseQuotient(col_scale);
  sol.objective = prob.c.dot(sol.x) + prob.c0;
  return sol;
}

void write_lp_format(const Problem& prob, std::ostream& os) {
  auto var_name = [&](int j) {
    return j < static_cast<int>(prob.var_names.size()) ? prob.var_names[j]
                                                       : "x" + std::to_string(j);
  };
  os << "Minimize\n obj:";
  for (int j = 0; j < prob.num_vars; ++j) {
    if (prob.c[j] == 0.0) continue;
    os << (prob.c[j] >= 0.0 ? " + " : " - ") << std::abs(prob.c[j]) << " "
       << var_name(j);
  }
  os << "\nSubject To\n";
  for (int i = 0; i < prob.num_rows(); ++i) {
    os << " "
       << (i < static_cast<int>(prob.row_names.size()) ? prob.row_names[i]
                                                       : "c" + std::to_string(i))
       << ":";
    for (int j = 0; j < prob.num_vars; ++j) {
      const double a = prob.rows[i][j];
      if (a == 0.0) continue;
      os << (a >= 0.0 ? " + " : " - ") << std::abs(a) << " " << var_name(j);
    }
    os << " <= " << prob.rhs[i] << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < prob.num_vars; ++j) os << " 0 <= " << var_name(j) << "\n";
  os << "End\n";
}

}  // namespace qode::lp
