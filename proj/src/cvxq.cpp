#include "qode/cvxq.hpp"

#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <map>

namespace qode {

MuMeasure MuMeasure::uniform_from(const TrainingBatch& batch, int stride) {
  MuMeasure mu;
  for (const auto& traj : batch.trajectories) {
    for (int k = 0; k < traj.grid.points(); k += stride)
      mu.samples.push_back({traj.x[k], traj.u[k], traj.grid.time(k), 1.0});
  }
  const double w = 1.0 / static_cast<double>(mu.samples.size());
  for (auto& s : mu.samples) s.w = w;
  return mu;
}

double ConstraintPoint::value(const Vec& theta) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates)
    best = std::max(best, -c.h0 - theta.dot(c.psi));
  return best + theta.dot(psi_filt_row) + const_term;
}

double ConstraintSet::exact_value(int j, int k, const Vec& theta, bool* grew) {
  ConstraintPoint& pt = per_traj[j][k];
  const GreedyResult g = greedy_u(theta, basis, pt.x, pt.t, strategy);
  double best = -g.value;
  double stored = -std::numeric_limits<double>::infinity();
  for (const auto& c : pt.candidates)
    stored = std::max(stored, -c.h0 - theta.dot(c.psi));
  if (best > stored + 1e-12 * (1.0 + std::abs(best))) {
    pt.candidates.push_back(
        {basis.features(pt.x, g.u, pt.t), basis.offset_at(pt.x, g.u, pt.t)});
    if (grew) *grew = true;
  }
  best = std::max(best, stored);
  return best + theta.dot(pt.psi_filt_row) + pt.const_term;
}

ConstraintSet build_constraint_set(const TrainingBatch& batch, int stride) {
  ConstraintSet cs;
  cs.dim = batch.basis.dim;
  cs.horizon = batch.grid().horizon;
  cs.basis = batch.basis;
  cs.strategy = batch.strategy;
  cs.per_traj.resize(batch.size());
  for (int j = 0; j < batch.size(); ++j) {
    const auto& traj = batch.trajectories[j];
    const auto& sig = batch.signals[j];
    const int n = traj.grid.points();
    // Strided subgrid keeps the end points; trapezoid weights on it.
    std::vector<int> ks;
    for (int k = 0; k < n; k += stride) ks.push_back(k);
    if (ks.back() != n - 1) ks.push_back(n - 1);
    auto& points = cs.per_traj[j];
    points.reserve(ks.size());
    for (std::size_t a = 0; a < ks.size(); ++a) {
      const int k = ks[a];
      const int fwd = n - 1 - k;
      ConstraintPoint pt;
      const double left = a == 0 ? 0.0 : traj.grid.time(ks[a]) - traj.grid.time(ks[a - 1]);
      const double right =
          a + 1 == ks.size() ? 0.0 : traj.grid.time(ks[a + 1]) - traj.grid.time(ks[a]);
      pt.weight = 0.5 * (left + right) / traj.grid.horizon;
      pt.const_term = -sig.terminal_term[k] + sig.h0_filt[k] - sig.cost_filt[k];
      pt.psi_filt_row = sig.psi_filt.row(k);
      pt.x = traj.x[fwd];
      pt.t = traj.grid.time(fwd);
      pt.candidates.push_back(
          {sig.psi_rev.row(k).transpose(), sig.h0_rev[k]});
      points.push_back(std::move(pt));
    }
  }
  return cs;
}

namespace {

Vec mu_objective(const ConstraintSet& cs, const MuMeasure& mu, double* c0) {
  Vec obj = Vec::Zero(cs.dim);
  *c0 = 0.0;
  for (const auto& s : mu.samples) {
    obj += s.w * cs.basis.features(s.x, s.u, s.t);
    *c0 += s.w * cs.basis.offset_at(s.x, s.u, s.t);
  }
  return obj;
}

}  // namespace

Vec CvxqLP::extract_theta(const Vec& x) const {
  Vec theta(dim);
  for (int i = 0; i < dim; ++i)
    theta[i] = x[i] - (neg_col[i] >= 0 ? x[neg_col[i]] : 0.0);
  return theta;
}

CvxqLP build_lp(const ConstraintSet& cs, const MuMeasure& mu, double tol,
                ConstraintMode mode) {
  CvxqLP out;
  out.dim = cs.dim;
  out.neg_col.assign(cs.dim, -1);
  std::vector<bool> signed_coeff(cs.dim, false);
  for (int i : cs.basis.sign_mask) signed_coeff[i] = true;
  int col = cs.dim;
  for (int i = 0; i < cs.dim; ++i)
    if (!signed_coeff[i]) out.neg_col[i] = col++;
  out.slack_begin = col;

  int n_points = 0;
  for (const auto& pts : cs.per_traj) n_points += static_cast<int>(pts.size());
  const int n_vars = out.slack_begin + n_points;

  lp::Problem& lp = out.lp;
  lp.num_vars = n_vars;
  lp.c = Vec::Zero(n_vars);
  Vec obj = mu_objective(cs, mu, &lp.c0);
  for (int i = 0; i < cs.dim; ++i) {
    lp.c[i] = obj[i];
    if (out.neg_col[i] >= 0) lp.c[out.neg_col[i]] = -obj[i];
  }

  auto theta_row = [&](const Vec& coef, int slack_col, Vec* row) {
    *row = Vec::Zero(n_vars);
    for (int i = 0; i < cs.dim; ++i) {
      (*row)[i] = coef[i];
      if (out.neg_col[i] >= 0) (*row)[out.neg_col[i]] = -coef[i];
    }
    if (slack_col >= 0) (*row)[slack_col] = -1.0;
  };

  int slack = out.slack_begin;
  Vec pooled_budget = Vec::Zero(n_vars);
  const int n_traj = static_cast<int>(cs.per_traj.size());
  for (int j = 0; j < n_traj; ++j) {
    Vec budget = Vec::Zero(n_vars);
    for (const auto& pt : cs.per_traj[j]) {
      for (const auto& c : pt.candidates) {
        Vec row;
        theta_row(pt.psi_filt_row - c.psi, slack, &row);
        lp.add_row(std::move(row), c.h0 - pt.const_term);
      }
      budget[slack] = pt.weight;
      pooled_budget[slack] = pt.weight / n_traj;
      ++slack;
    }
    if (mode == ConstraintMode::PerTrajectory) lp.add_row(std::move(budget), tol);
  }
  if (mode == ConstraintMode::Pooled) lp.add_row(std::move(pooled_budget), tol);
  return out;
}

// ---------------------------------------------------------------------------
// Constraint generation.

namespace {

struct Master {
  // Active hinge rows (traj, point, candidate) plus one budget row per
  // trajectory with active points.
  std::vector<std::array<int, 3>> rows;
  std::map<std::pair<int, int>, int> point_of;  // (j,k) -> dense point index
};

CvxqLP assemble_master(const ConstraintSet& cs, const Master& master,
                       const Vec& obj, double c0, double tol,
                       ConstraintMode mode, double theta_cap) {
  CvxqLP out;
  out.dim = cs.dim;
  out.neg_col.assign(cs.dim, -1);
  std::vector<bool> signed_coeff(cs.dim, false);
  for (int i : cs.basis.sign_mask) signed_coeff[i] = true;
  int col = cs.dim;
  for (int i = 0; i < cs.dim; ++i)
    if (!signed_coeff[i]) out.neg_col[i] = col++;
  out.slack_begin = col;
  const int n_vars = out.slack_begin + static_cast<int>(master.point_of.size());

  lp::Problem& lp = out.lp;
  lp.num_vars = n_vars;
  lp.c = Vec::Zero(n_vars);
  lp.c0 = c0;
  for (int i = 0; i < cs.dim; ++i) {
    lp.c[i] = obj[i];
    if (out.neg_col[i] >= 0) lp.c[out.neg_col[i]] = -obj[i];
  }

  for (const auto& r : master.rows) {
    const auto& pt = cs.per_traj[r[0]][r[1]];
    const auto& c = pt.candidates[r[2]];
    Vec row = Vec::Zero(n_vars);
    const Vec coef = pt.psi_filt_row - c.psi;
    for (int i = 0; i < cs.dim; ++i) {
      row[i] = coef[i];
      if (out.neg_col[i] >= 0) row[out.neg_col[i]] = -coef[i];
    }
    row[out.slack_begin + master.point_of.at({r[0], r[1]})] = -1.0;
    lp.add_row(std::move(row), c.h0 - pt.const_term);
  }

  // Budget rows.
  const int n_traj = static_cast<int>(cs.per_traj.size());
  if (mode == ConstraintMode::PerTrajectory) {
    std::map<int, Vec> budget;
    for (const auto& [jk, idx] : master.point_of) {
      auto it = budget.find(jk.first);
      if (it == budget.end())
        it = budget.emplace(jk.first, Vec::Zero(n_vars)).first;
      it->second[out.slack_begin + idx] = cs.per_traj[jk.first][jk.second].weight;
    }
    for (auto& [j, row] : budget) {
      (void)j;
      lp.add_row(std::move(row), tol);
    }
  } else {
    Vec row = Vec::Zero(n_vars);
    for (const auto& [jk, idx] : master.point_of)
      row[out.slack_begin + idx] =
          cs.per_traj[jk.first][jk.second].weight / n_traj;
    lp.add_row(std::move(row), tol);
  }

  // Coefficient box: keeps every master bounded regardless of which cuts
  // are currently active.
  for (int i = 0; i < out.slack_begin; ++i) {
    Vec row = Vec::Zero(n_vars);
    row[i] = 1.0;
    lp.add_row(std::move(row), theta_cap);
  }
  return out;
}

}  // namespace

CvxqResult solve_cvxq(const TrainingBatch& batch, const MuMeasure& mu,
                      const CvxqOptions& opts) {
  ConstraintSet cs = build_constraint_set(batch, opts.constraint_stride);
  const double tol = opts.tol < 0.0 ? default_tol(batch) : opts.tol;

  double c0 = 0.0;
  const Vec obj = mu_objective(cs, mu, &c0);

  // Absolute slack on the budget check, scaled by the data magnitude.
  double scale = 0.0;
  long n_scale = 0;
  for (const auto& sig : batch.signals) {
    scale += sig.cost_filt.cwiseAbs().sum();
    n_scale += sig.cost_filt.size();
  }
  scale = n_scale > 0 ? scale / n_scale : 1.0;
  const double abs_eps = 1e-9 * (1.0 + scale);

  Master master;
  CvxqResult res;
  Vec theta_base = Vec::Zero(cs.dim);
  const int n_traj = static_cast<int>(cs.per_traj.size());

  // Seed the master with every point's sampled-input cut so the first
  // solve starts against the data instead of at the coefficient box.
  for (int j = 0; j < n_traj; ++j)
    for (int k = 0; k < static_cast<int>(cs.per_traj[j].size()); ++k) {
      master.rows.push_back({j, k, 0});
      const int idx = static_cast<int>(master.point_of.size());
      master.point_of[{j, k}] = idx;
    }

  // Evaluates the exact constraint at theta; when violated, adds hinge rows
  // for the worst points and returns true.
  double dbg_excess = 0.0;
  auto add_violations = [&](const Vec& theta) {
    std::vector<std::vector<std::pair<double, int>>> positive(n_traj);
    std::vector<double> excess(n_traj, 0.0);
    dbg_excess = 0.0;
    for (int j = 0; j < n_traj; ++j) {
      const auto& pts = cs.per_traj[j];
      for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
        const double h = cs.exact_value(j, k, theta);
        if (h > 0.0) {
          excess[j] += pts[k].weight * h;
          positive[j].push_back({h, k});
        }
      }
    }
    const double limit = tol * (1.0 + 1e-7) + abs_eps;
    for (double v : excess) dbg_excess = std::max(dbg_excess, v);
    std::vector<int> offenders;
    if (opts.mode == ConstraintMode::PerTrajectory) {
      for (int j = 0; j < n_traj; ++j)
        if (excess[j] > limit) offenders.push_back(j);
    } else {
      double mean = 0.0;
      for (double v : excess) mean += v;
      if (mean / n_traj > limit)
        for (int j = 0; j < n_traj; ++j)
          if (!positive[j].empty()) offenders.push_back(j);
    }
    bool added = false;
    for (int j : offenders) {
      std::sort(positive[j].rbegin(), positive[j].rend());
      int added_here = 0;
      for (const auto& [h, k] : positive[j]) {
        (void)h;
        if (added_here >= opts.max_added_per_traj) break;
        const auto& pt = cs.per_traj[j][k];
        int best_c = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < static_cast<int>(pt.candidates.size()); ++c) {
          const double val =
              -pt.candidates[c].h0 - theta.dot(pt.candidates[c].psi);
          if (val > best) {
            best = val;
            best_c = c;
          }
        }
        const std::array<int, 3> row{j, k, best_c};
        if (std::find(master.rows.begin(), master.rows.end(), row) !=
            master.rows.end())
          continue;
        master.rows.push_back(row);
        if (!master.point_of.count({j, k})) {
          const int idx = static_cast<int>(master.point_of.size());
          master.point_of[{j, k}] = idx;
        }
        added = true;
        ++added_here;
      }
    }
    return added;
  };

  // Best relaxed iterate seen so far (pass-limited mode only).
  double best_excess = std::numeric_limits<double>::infinity();
  Vec best_theta;
  auto finish_relaxed = [&](CvxqResult& r) {
    r.status = CvxqStatus::Optimal;
    r.theta = best_theta;
    r.objective = obj.dot(best_theta) + c0;
    r.exact_excess = best_excess;
  };

  for (int round = 0; round < opts.max_rounds; ++round) {
    res.rounds = round + 1;
    CvxqLP mlp =
        assemble_master(cs, master, obj, c0, tol, opts.mode, opts.theta_cap);
    res.master_rows = mlp.lp.num_rows();
    lp::Solution sol = lp::solve(mlp.lp, opts.lp_opts);
    res.lp_iterations += sol.iterations;
    if (sol.status == lp::Status::IterLimit) {
      // Degenerate stall: retry once with a deterministic micro-perturbation
      // of the right-hand sides, which breaks the tie pattern without moving
      // the optimum past the exact feasibility check.
      for (int i = 0; i < mlp.lp.num_rows(); ++i)
        mlp.lp.rhs[i] += 1e-9 * (1.0 + std::abs(mlp.lp.rhs[i])) *
                         ((i % 7) + 1) / 7.0;
      sol = lp::solve(mlp.lp, opts.lp_opts);
      res.lp_iterations += sol.iterations;
    }
    if (getenv("QODE_CVXQ_DEBUG")) {
      double tn = 0.0, tmax = 0.0;
      if (sol.status == lp::Status::Optimal) {
        const Vec th = mlp.extract_theta(sol.x);
        tn = th.norm();
        tmax = th.cwiseAbs().maxCoeff();
      }
      fprintf(stderr,
              "cvxq round=%d rows=%d lp_status=%d lp_iters=%d obj=%.6g "
              "excess=%.3g tol=%.3g |theta|=%.3g max=%.3g\n",
              round, res.master_rows, static_cast<int>(sol.status),
              sol.iterations, sol.objective, dbg_excess, tol, tn, tmax);
    }

    if (sol.status == lp::Status::Optimal) {
      const Vec theta = mlp.extract_theta(sol.x);
      const std::size_t solved_rows = master.rows.size();
      bool capped = false;
      for (int i = 0; i < mlp.slack_begin; ++i)
        capped = capped || sol.x[i] > 0.99 * opts.theta_cap;
      if (!add_violations(theta)) {
        if (capped) {
          // Exactly feasible at the box: the improving direction recedes,
          // so the program is unbounded for practical purposes.
          res.status = CvxqStatus::Unbounded;
          res.ray = theta.normalized();
          res.theta = theta_base;
          return res;
        }
        res.status = CvxqStatus::Optimal;
        res.theta = theta;
        res.objective = obj.dot(theta) + c0;
        res.exact_excess = dbg_excess;
        return res;
      }
      if (opts.max_passes > 0) {
        if (dbg_excess < best_excess) {
          best_excess = dbg_excess;
          best_theta = theta;
        }
        const double move = (theta - theta_base).norm();
        if (round + 1 >= opts.max_passes ||
            (round > 0 &&
             move < opts.theta_move_tol * (1.0 + theta_base.norm()))) {
          finish_relaxed(res);
          return res;
        }
      }
      theta_base = theta;
      // Cut management: drop hinge rows that were slack at this optimum so
      // the master stays near the active set; pruned cuts return through
      // the violation check if they bind again.
      if (solved_rows > 64) {
        std::vector<std::array<int, 3>> kept;
        kept.reserve(master.rows.size());
        for (std::size_t r = 0; r < master.rows.size(); ++r) {
          if (r < solved_rows) {
            const double slackv =
                mlp.lp.rhs[r] - mlp.lp.rows[r].dot(sol.x);
            if (slackv > 1e-3 * (1.0 + std::abs(mlp.lp.rhs[r]))) continue;
          }
          kept.push_back(master.rows[r]);
        }
        if (kept.size() < master.rows.size()) {
          master.rows = std::move(kept);
          master.point_of.clear();
          for (const auto& r : master.rows)
            if (!master.point_of.count({r[0], r[1]})) {
              const int idx = static_cast<int>(master.point_of.size());
              master.point_of[{r[0], r[1]}] = idx;
            }
        }
      }
    } else if (sol.status == lp::Status::Unbounded) {
      Vec v = mlp.extract_theta(sol.ray);
      const double norm = v.norm();
      if (norm < 1e-12) {
        res.status = CvxqStatus::IterLimit;
        return res;
      }
      v /= norm;
      // Probe far along the ray; either it stays feasible (certified
      // unbounded up to the probe radius) or it yields new rows.
      const double omega = 1e6 * (1.0 + theta_base.norm());
      if (!add_violations(theta_base + omega * v)) {
        res.status = CvxqStatus::Unbounded;
        res.ray = v;
        res.theta = theta_base;
        return res;
      }
    } else {
      // The LP stalled; fall back to the best relaxed iterate if one exists.
      if (opts.max_passes > 0 && best_theta.size() > 0) {
        finish_relaxed(res);
        return res;
      }
      res.status = CvxqStatus::IterLimit;
      return res;
    }
  }
  if (opts.max_passes > 0 && best_theta.size() > 0) {
    finish_relaxed(res);
    return res;
  }
  res.status = CvxqStatus::IterLimit;
  return res;
}

}  // namespace qode
