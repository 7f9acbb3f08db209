#include "qode/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "qode/batch_ops.hpp"
#include "qode/diagnostics.hpp"
#include "qode/integrate.hpp"
#include "qode/serialize.hpp"

namespace qode {

namespace {

template <class T>
T require(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key))
    throw ConfigError(std::string("missing config key: ") + key);
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("bad config value for key: ") + key);
  }
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc) {
  RunConfig cfg;
  cfg.scenario = require<std::string>(doc, "scenario");
  cfg.sigma = require<double>(doc, "sigma");
  cfg.seed = require<unsigned>(doc, "seed");
  if (cfg.scenario != "lqr" && cfg.scenario != "dispatch")
    throw ConfigError("unknown scenario: " + cfg.scenario);
  cfg.tol = doc.value("tol", -1.0);
  cfg.training_mode = doc.value("training_mode", std::string("nominal"));
  if (cfg.training_mode != "nominal" && cfg.training_mode != "robust")
    throw ConfigError("training_mode must be nominal or robust");
  cfg.trainer = doc.value("trainer", std::string("cvxq"));
  if (cfg.trainer != "cvxq" && cfg.trainer != "dqn")
    throw ConfigError("trainer must be cvxq or dqn");
  cfg.runs = doc.value("runs", cfg.scenario == "dispatch" ? 44 : 8);
  cfg.out_dir = doc.value("out", std::string("."));
  cfg.grid_steps = doc.value("grid_steps",
                             cfg.scenario == "dispatch" ? 288 : 400);
  cfg.model = doc.value("model", nlohmann::json::object());
  cfg.basis = doc.value("basis", nlohmann::json::object());
  cfg.solver = doc.value("solver", nlohmann::json::object());
  cfg.raw = doc;
  return cfg;
}

LqrInstance lqr_scalar_instance(double horizon) {
  LqrInstance inst;
  inst.A = Mat::Zero(1, 1);
  inst.B = Mat::Ones(1, 1);
  inst.Q = Mat::Ones(1, 1);
  inst.R = Mat::Ones(1, 1);
  inst.QT = Mat::Zero(1, 1);
  inst.horizon = horizon;
  return inst;
}

TrainingBatch make_lqr_batch(const LqrInstance& inst,
                             const RiccatiSolution& ric, double sigma,
                             int runs, const TimeGrid& grid, unsigned seed,
                             bool true_features) {
  TrainingBatch batch;
  batch.basis = true_features ? lqr_true_feature_basis(ric, inst, sigma)
                              : lqr_oracle_basis(ric, inst, sigma);
  // Both classes have theta-independent positive curvature in u (R sits in
  // the offset of the feature class and inside the oracle feature), so the
  // exact scalar minimizer applies at every theta.
  batch.strategy = AnalyticScalarQuadratic{};
  batch.sigma = sigma;

  const ControlSystem sys = lqr_system(inst);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  constexpr double pi = 3.14159265358979323846;

  std::vector<Trajectory> trajs;
  for (int run = 0; run < runs; ++run) {
    Vec x0(inst.state_dim());
    for (int i = 0; i < x0.size(); ++i) x0[i] = unit(rng);
    InputSignal input;
    if (run % 4 == 0) {
      input = [&ric, &inst](const Vec& x, double t) {
        return lqr_policy(ric, inst, x, t);
      };
    } else {
      // Smooth multi-sine exploration; piecewise-constant levels would add
      // interpolation error at the jumps that pollutes the identity checks.
      const int m = inst.input_dim();
      Mat amp(3, m), freq(3, m), phase(3, m);
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < m; ++i) {
          amp(k, i) = 0.8 * unit(rng);
          freq(k, i) =
              2.0 * pi * (k + 1) * (1.0 + 0.25 * unit(rng)) / grid.horizon;
          phase(k, i) = pi * unit(rng);
        }
      input = open_loop([amp, freq, phase, m](double t) {
        Vec u = Vec::Zero(m);
        for (int k = 0; k < 3; ++k)
          for (int i = 0; i < m; ++i)
            u[i] += amp(k, i) * std::sin(freq(k, i) * t + phase(k, i));
        return u;
      });
    }
    trajs.push_back(integrate(sys, input, x0, grid));
  }
  batch.signals = build_filtered_batch(trajs, batch.basis, sigma);
  batch.trajectories = std::move(trajs);
  batch.tol = default_tol(batch);
  return batch;
}

DispatchScenario default_dispatch_scenario() {
  DispatchScenario sc;
  DERModel& m = sc.model;
  m.M = 5;
  m.alpha = Vec(5);
  m.alpha << 0.05, 0.1, 0.15, 0.25, 0.4;
  m.cap_scale = Vec(5);
  m.cap_scale << 1.0, 0.8, 1.2, 0.9, 1.1;
  m.cap_logcosh_weight = 1.0;
  m.cap_width = 1.0;
  m.kappa = 0.2;
  m.kappa_ell = 4.0;
  m.D = Vec::Constant(5, 0.5);
  m.k_ell = 1.0;
  m.load = synth_net_load(
      0.0, {{0.8, 24.0, 0.5}, {0.5, 12.0, 2.0}, {0.25, 8.0, 4.2}});
  m.horizon = 24.0;
  m.input_box.lo = Vec::Constant(5, -2.0);
  m.input_box.hi = Vec::Constant(5, 2.0);

  sc.basis.n_f = 30;
  sc.basis.include_constant = true;
  sc.basis.horizon = m.horizon;
  sc.sigma = 5e-4;
  sc.grid = TimeGrid::make(24.0, 288);
  sc.exploration.dwell = 0.5;
  sc.exploration.u_sigma_max = 2.0;
  sc.exploration.x0_box = 1.0;
  sc.exploration.robust_eps = 0.5;
  sc.runs = 44;
  return sc;
}

DispatchScenario dispatch_scenario_from(const RunConfig& cfg) {
  DispatchScenario sc = default_dispatch_scenario();
  sc.sigma = cfg.sigma;
  sc.runs = cfg.runs;
  sc.grid = TimeGrid::make(sc.model.horizon, cfg.grid_steps);
  if (cfg.basis.contains("n_f")) sc.basis.n_f = cfg.basis.at("n_f");
  if (cfg.basis.contains("include_constant"))
    sc.basis.include_constant = cfg.basis.at("include_constant");
  if (cfg.model.contains("kappa")) sc.model.kappa = cfg.model.at("kappa");
  if (cfg.model.contains("kappa_ell"))
    sc.model.kappa_ell = cfg.model.at("kappa_ell");
  if (cfg.model.contains("k_ell")) sc.model.k_ell = cfg.model.at("k_ell");
  if (cfg.model.contains("robust_eps"))
    sc.exploration.robust_eps = cfg.model.at("robust_eps");
  return sc;
}

ThetaVector train_dispatch(const DispatchScenario& sc, TrainingMode mode,
                           unsigned seed, const CvxqOptions& opts_in) {
  GeneratedBatch gen = gen_training_batch(sc.model, sc.basis, mode, sc.runs,
                                          sc.exploration, sc.grid, sc.sigma,
                                          seed);
  CvxqOptions opts = opts_in;
  if (opts.constraint_stride == 1) opts.constraint_stride = 4;
  if (opts.max_passes == 0) opts.max_passes = 6;
  // Routine master solves finish in ~1e4 pivots; a stalled one should fail
  // fast so the pass loop can fall back to its best iterate.
  opts.lp_opts.max_iterations =
      std::min(opts.lp_opts.max_iterations, 50000);
  const MuMeasure mu =
      MuMeasure::uniform_from(gen.batch, opts.constraint_stride);
  const CvxqResult res = solve_cvxq(gen.batch, mu, opts);

  ThetaVector theta;
  theta.coeffs = res.theta;
  theta.metadata["scenario"] = "dispatch";
  theta.metadata["mode"] = mode == TrainingMode::Robust ? "robust" : "nominal";
  theta.metadata["sigma"] = sc.sigma;
  theta.metadata["tol"] = opts.tol < 0.0 ? gen.batch.tol : opts.tol;
  theta.metadata["seed"] = seed;
  theta.metadata["basis_dim"] = sc.basis.dim();
  theta.metadata["model_hash"] = sc.model.hash();
  theta.metadata["status"] =
      res.status == CvxqStatus::Optimal
          ? "optimal"
          : (res.status == CvxqStatus::Unbounded ? "unbounded" : "iter_limit");
  theta.metadata["objective"] = res.objective;
  theta.metadata["exact_excess"] = res.exact_excess;
  theta.metadata["rounds"] = res.rounds;
  theta.metadata["lp_iterations"] = res.lp_iterations;
  theta.metadata["master_rows"] = res.master_rows;
  return theta;
}

TrainResult run_training(const RunConfig& cfg) {
  TrainResult out;
  if (cfg.scenario == "lqr") {
    const LqrInstance inst = lqr_scalar_instance(2.0);
    const TimeGrid grid = TimeGrid::make(inst.horizon, cfg.grid_steps);
    const RiccatiSolution ric = riccati_solve(inst, grid);
    const bool oracle_basis =
        cfg.basis.value("kind", std::string("value")) == "oracle";
    TrainingBatch batch = make_lqr_batch(inst, ric, cfg.sigma, cfg.runs, grid,
                                         cfg.seed, !oracle_basis);
    if (cfg.tol > 0.0) batch.tol = cfg.tol;
    if (cfg.trainer == "cvxq") {
      CvxqOptions opts;
      opts.tol = cfg.tol;
      opts.constraint_stride = cfg.solver.value("constraint_stride", 4);
      const MuMeasure mu =
          MuMeasure::uniform_from(batch, opts.constraint_stride);
      const CvxqResult res = solve_cvxq(batch, mu, opts);
      out.theta.coeffs = res.theta;
      out.report["status"] =
          res.status == CvxqStatus::Optimal ? "optimal" : "not_optimal";
      out.report["objective"] = res.objective;
      out.report["rounds"] = res.rounds;
      out.report["lp_iterations"] = res.lp_iterations;
    } else {
      DqnConfig dcfg;
      dcfg.max_iterations = cfg.solver.value("max_iterations", 200);
      dcfg.alpha0 = cfg.solver.value("alpha0", 0.05);
      dcfg.delta_tol = cfg.solver.value("delta_tol", 1e-10);
      // The oracle class scales the whole Hamiltonian, so its start must keep
      // the input curvature positive; the value class accepts any start.
      const double start = cfg.solver.value("theta0", oracle_basis ? 1.5 : 0.0);
      const DqnTrace trace =
          train_dqn(dcfg, batch, Vec::Constant(batch.basis.dim, start));
      out.theta.coeffs = trace.theta;
      out.report["status"] = trace.diverged ? "diverged" : "converged";
      out.report["iterations"] = trace.iterations;
      out.report["bellman_norm"] =
          trace.bellman_norm.empty() ? 0.0 : trace.bellman_norm.back();
    }
    out.theta.metadata["scenario"] = "lqr";
    out.theta.metadata["sigma"] = cfg.sigma;
    out.theta.metadata["tol"] = batch.tol;
    out.theta.metadata["seed"] = cfg.seed;
    out.theta.metadata["basis_dim"] = batch.basis.dim;
    out.report["constraint_value"] =
        constraint_value(out.theta.coeffs, batch);
  } else {
    const DispatchScenario sc = dispatch_scenario_from(cfg);
    const TrainingMode mode = cfg.training_mode == "robust"
                                  ? TrainingMode::Robust
                                  : TrainingMode::Nominal;
    CvxqOptions opts;
    opts.tol = cfg.tol;
    opts.constraint_stride = cfg.solver.value("constraint_stride", 4);
    opts.max_rounds = cfg.solver.value("max_rounds", 200);
    opts.max_passes = cfg.solver.value("max_passes", 0);
    out.theta = train_dispatch(sc, mode, cfg.seed, opts);
    out.report["status"] = out.theta.metadata["status"];
    out.report["objective"] = out.theta.metadata["objective"];
    out.report["rounds"] = out.theta.metadata["rounds"];
  }
  out.theta.metadata["config_hash"] = config_hash(cfg.raw);
  out.report["config_hash"] = config_hash(cfg.raw);
  return out;
}

nlohmann::json run_diagnostics_on(const TrainingBatch& batch,
                                  int boundedness_dirs, double r_max,
                                  unsigned seed) {
  nlohmann::json report;
  const Mat sigma = covariance(batch);
  report["E1"] = verdict_json(check_E1(batch, 1e-4, 4));
  report["E2"] = verdict_json(check_E2(batch, 1e-7, 16, seed));
  report["E3"] = verdict_json(check_E3(sigma));
  if (boundedness_dirs > 0)
    report["boundedness"] = boundedness_json(probe_boundedness(
        batch, batch.tol, boundedness_dirs, r_max, seed));
  report["basis_dim"] = batch.basis.dim;
  report["trajectories"] = batch.size();
  return report;
}

nlohmann::json run_diagnostics(const RunConfig& cfg) {
  nlohmann::json report;
  if (cfg.scenario == "lqr") {
    const LqrInstance inst = lqr_scalar_instance(2.0);
    const TimeGrid grid = TimeGrid::make(inst.horizon, cfg.grid_steps);
    const RiccatiSolution ric = riccati_solve(inst, grid);
    const TrainingBatch batch =
        make_lqr_batch(inst, ric, cfg.sigma, cfg.runs, grid, cfg.seed);
    report = run_diagnostics_on(batch, 16, 1e6, cfg.seed);
  } else {
    const DispatchScenario sc = dispatch_scenario_from(cfg);
    const TrainingMode mode = cfg.training_mode == "robust"
                                  ? TrainingMode::Robust
                                  : TrainingMode::Nominal;
    const GeneratedBatch gen =
        gen_training_batch(sc.model, sc.basis, mode, sc.runs, sc.exploration,
                           sc.grid, sc.sigma, cfg.seed);
    report = run_diagnostics_on(gen.batch, 8, 1e6, cfg.seed);
  }
  report["config_hash"] = config_hash(cfg.raw);
  return report;
}

EvalResult run_eval(const RunConfig& cfg, const ThetaVector& theta_nom,
                    const ThetaVector& theta_rob,
                    const std::vector<double>& tau_ladder,
                    const std::vector<double>& eps_ladder, int trials) {
  if (tau_ladder.empty() && eps_ladder.empty())
    throw ConfigError("eval requires a non-empty tau or eps ladder");
  const DispatchScenario sc = dispatch_scenario_from(cfg);
  EvalResult out;

  const Vec x0 = Vec::Zero(2 * sc.model.M);
  const OptimalSolution opt =
      solve_dispatch_optimal(sc.model, sc.grid, x0);

  auto base_cfg = [&](TerminalKind kind, const Vec& theta) {
    MpcConfig mc;
    mc.window = 40.0 / 60.0;
    mc.terminal = kind;
    mc.theta = theta;
    mc.basis = sc.basis;
    return mc;
  };

  for (double tau : tau_ladder) {
    for (int kind = 0; kind < 3; ++kind) {
      MpcConfig mc = base_cfg(
          kind == 0 ? TerminalKind::Zero : TerminalKind::Learned,
          kind == 1 ? theta_nom.coeffs : theta_rob.coeffs);
      mc.window = tau;
      const Trajectory traj =
          evaluate_policy(sc.model, sc.model, mc, sc.grid, x0);
      out.tau_table.push_back(
          {tau, static_cast<double>(kind), running_cost_integral(traj)});
    }
  }

  // Cost-to-go tracking along the optimal trajectory (nominal theta).
  for (int k = 0; k <= sc.grid.steps; ++k) {
    const double t = sc.grid.time(k);
    const double jt = der_value(sc.model, sc.basis, theta_nom.coeffs,
                                opt.states[k], t);
    out.cost_to_go.push_back({t, opt.cost_to_go[k], jt});
  }

  // Closed-loop power deviation under the robust MPC-Q policy.
  {
    const MpcConfig mc = base_cfg(TerminalKind::Learned, theta_rob.coeffs);
    const Trajectory traj =
        evaluate_policy(sc.model, sc.model, mc, sc.grid, x0);
    for (int k = 0; k <= sc.grid.steps; ++k) {
      const double t = sc.grid.time(k);
      out.power.push_back(
          {t, traj.x[k].tail(sc.model.M).sum(), sc.model.load.value(t)});
    }
  }

  for (double eps : eps_ladder) {
    const PerformanceStats nom = avg_performance(
        sc.model, base_cfg(TerminalKind::Learned, theta_nom.coeffs), sc.grid,
        eps, trials, sc.exploration.x0_box, cfg.seed + 17);
    const PerformanceStats rob = avg_performance(
        sc.model, base_cfg(TerminalKind::Learned, theta_rob.coeffs), sc.grid,
        eps, trials, sc.exploration.x0_box, cfg.seed + 17);
    out.eps_table_nom.push_back({eps, nom.mean, nom.stderr_});
    out.eps_table_rob.push_back({eps, rob.mean, rob.stderr_});
  }
  return out;
}

}  // namespace qode
