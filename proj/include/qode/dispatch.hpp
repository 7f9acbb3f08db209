#pragma once

#include <random>

#include "qode/bellman.hpp"

namespace qode {

/// Smooth net-load profile: mean plus sinusoidal harmonics, with an analytic
/// derivative.
struct NetLoad {
  struct Harmonic {
    double amplitude = 0.0;
    double period = 24.0;
    double phase = 0.0;
  };
  double mean = 0.0;
  std::vector<Harmonic> harmonics;

  double value(double t) const;
  double derivative(double t) const;
};

NetLoad synth_net_load(double mean, std::vector<NetLoad::Harmonic> harmonics);

/// Virtual-energy-storage dispatch model. State is the augmented pair
/// x^a = (x, z) in R^{2M}: per-class state of charge and power deviation;
/// the input is u = zdot in R^M.
struct DERModel {
  int M = 0;
  Vec alpha;                       // leakage rates, 1/hour
  Vec cap_scale;                   // per-class soft-capacity scale a_i
  double cap_logcosh_weight = 1.0; // b in a_i (x^2 + b w^2 logcosh(x/w))
  double cap_width = 1.0;          // w
  double kappa = 1.0;              // ramp weight on (u_sigma - load')^2
  double kappa_ell = 1.0;          // tracking weight on (z_sigma - load)^2
  Vec D;                           // diagonal terminal weight on x
  double k_ell = 1.0;              // terminal tracking weight
  NetLoad load;
  double horizon = 24.0;
  Box input_box;                   // exploration clamp on u

  double soft_capacity_cost(int i, double x) const;
  double soft_capacity_grad(int i, double x) const;
  double terminal_value(const Vec& xa) const;
  Vec terminal_grad(const Vec& xa) const;
  double running_cost(const Vec& xa, const Vec& u, double t) const;
  void running_cost_grad(const Vec& xa, const Vec& u, double t, Vec* d_xa,
                         Vec* d_u) const;

  /// Balance identities (generation and its ramp are derived quantities):
  /// g = load - z_sigma, gamma = load' - u_sigma.
  double generation(const Vec& xa, double t) const;
  double generation_ramp(const Vec& u, double t) const;

  /// FNV-1a hash of all model parameters.
  std::uint64_t hash() const;
};

ControlSystem make_der_system(const DERModel& model);

/// Fresh model with leakage perturbed multiplicatively by iid factors from
/// [1 - eps, 1 + eps].
DERModel perturb_model(const DERModel& model, double eps, std::mt19937_64& rng);

/// Basis over the aggregates (x_sigma, z_sigma): spatial factors
/// {x_sigma^2, x_sigma, z_sigma^2, z_sigma, 2 x_sigma z_sigma [, 1]} times
/// temporal factors {s^2, 1 - cos(w_i s)} at s = T - t, so every basis
/// function vanishes at the horizon.
struct DispatchBasis {
  int n_f = 30;
  bool include_constant = true;
  double horizon = 24.0;

  int n_spatial() const { return include_constant ? 6 : 5; }
  int n_temporal() const { return n_f + 1; }
  int dim() const { return n_spatial() * n_temporal(); }

  /// Value-basis features psi(x_sigma, z_sigma, t) and their gradients.
  Vec eval(double xs, double zs, double t) const;
  void eval_grads(double xs, double zs, double t, Vec* psi, Vec* d_xs,
                  Vec* d_zs, Vec* d_t) const;
  std::vector<int> sign_mask() const;  // quadratic-coefficient entries
};

/// The model-based H-function class: per-coefficient H-basis
///   psi_H = -sigma psi + grad(psi) . F + dpsi/dt
/// with affine offset h0 = c - sigma J0 + grad(J0) . F. Analytic gradients.
BasisSet der_value_class(const DERModel& model, const DispatchBasis& basis,
                         double sigma);

/// Learned cost-to-go J^theta(xa, t) = J0(xa) + theta' psi and its state
/// gradient, for MPC terminal costs.
double der_value(const DERModel& model, const DispatchBasis& basis,
                 const Vec& theta, const Vec& xa, double t);
Vec der_value_grad(const DERModel& model, const DispatchBasis& basis,
                   const Vec& theta, const Vec& xa, double t);

enum class TrainingMode { Nominal, Robust };

struct ExplorationSpec {
  double dwell = 0.5;      // hours between input resamples
  double u_sigma_max = 1.0;
  double x0_box = 1.0;     // initial conditions uniform in [-box, box]^{2M}
  double robust_eps = 0.5; // model perturbation for robust mode
};

struct GeneratedBatch {
  TrainingBatch batch;
  std::vector<std::uint64_t> model_hashes;  // per run
};

GeneratedBatch gen_training_batch(const DERModel& model,
                                  const DispatchBasis& basis, TrainingMode mode,
                                  int runs, const ExplorationSpec& spec,
                                  const TimeGrid& grid, double sigma,
                                  unsigned seed);

}  // namespace qode
