#pragma once

#include <string>

#include <json.hpp>

#include "qode/cvxq.hpp"
#include "qode/dqn.hpp"
#include "qode/lqr.hpp"
#include "qode/mpc.hpp"

namespace qode {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One fully-specified run: scenario, model/basis parameters, training
/// settings and provenance. Parsed from a JSON document; missing required
/// keys raise ConfigError naming the key.
struct RunConfig {
  std::string scenario;  // "lqr" or "dispatch"
  double sigma = 0.0;
  double tol = -1.0;          // < 0: scale-aware default
  std::string training_mode = "nominal";
  std::string trainer = "cvxq";  // or "dqn"
  int runs = 8;
  unsigned seed = 0;
  std::string out_dir = ".";
  int grid_steps = 400;
  nlohmann::json model;   // scenario-specific overrides
  nlohmann::json basis;
  nlohmann::json solver;
  nlohmann::json raw;     // the full document, for hashing
};

RunConfig parse_config(const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// LQR smoke scenario: the scalar double-integrator-free instance
// xdot = u, Q = R = 1, QT = 0, whose Riccati solution is P(t) = tanh(T - t).

LqrInstance lqr_scalar_instance(double horizon);

/// Training batch on the scalar LQR instance: mixed rollouts (optimal policy
/// plus smooth multi-sine exploration), initial states in [-1, 1]. The inner
/// minimization is the exact scalar quadratic minimizer for both classes.
TrainingBatch make_lqr_batch(const LqrInstance& inst,
                             const RiccatiSolution& ric, double sigma,
                             int runs, const TimeGrid& grid, unsigned seed,
                             bool true_features = true);

// ---------------------------------------------------------------------------
// Dispatch scenario fixture: the fixed synthetic instance used by training,
// evaluation and the qualitative acceptance runs.

struct DispatchScenario {
  DERModel model;
  DispatchBasis basis;
  double sigma = 5e-4;
  TimeGrid grid = TimeGrid::make(24.0, 288);
  ExplorationSpec exploration;
  int runs = 44;
};

DispatchScenario default_dispatch_scenario();
DispatchScenario dispatch_scenario_from(const RunConfig& cfg);

/// Train the dispatch value class on a generated batch; metadata records the
/// mode, seed, tolerances and solver statistics.
ThetaVector train_dispatch(const DispatchScenario& sc, TrainingMode mode,
                           unsigned seed, const CvxqOptions& opts = {});

// ---------------------------------------------------------------------------
// Orchestration used by the CLI.

struct TrainResult {
  ThetaVector theta;
  nlohmann::json report;
};

TrainResult run_training(const RunConfig& cfg);

nlohmann::json run_diagnostics_on(const TrainingBatch& batch,
                                  int boundedness_dirs = 16,
                                  double r_max = 1e6, unsigned seed = 0);
nlohmann::json run_diagnostics(const RunConfig& cfg);

struct EvalResult {
  // tau ladder rows: {tau_hours, terminal_kind(0 zero/1 fixed/2 learned),
  // total_cost}
  std::vector<std::vector<double>> tau_table;
  // eps ladder rows: {eps, mean, stderr} per policy
  std::vector<std::vector<double>> eps_table_nom;
  std::vector<std::vector<double>> eps_table_rob;
  // cost-to-go tracking rows: {t, J_star, J_theta}
  std::vector<std::vector<double>> cost_to_go;
  // power trajectories: {t, z_sigma, load}
  std::vector<std::vector<double>> power;
};

EvalResult run_eval(const RunConfig& cfg, const ThetaVector& theta_nom,
                    const ThetaVector& theta_rob,
                    const std::vector<double>& tau_ladder,
                    const std::vector<double>& eps_ladder, int trials);

}  // namespace qode
