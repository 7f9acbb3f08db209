#include "qode/filters.hpp"

#include <cmath>

namespace qode {

namespace {

// Update weights for one step of the exponential integrator:
//   y_{k+1} = decay * y_k + w0 * s_k + w1 * (s_{k+1} - s_k)
// Exact for inputs linear on the step; series-safe for small sigma*dt.
struct StepWeights {
  double decay, w0, w1;
};

StepWeights step_weights(double sigma, double dt) {
  const double a = sigma * dt;
  StepWeights w;
  w.decay = std::exp(-a);
  w.w0 = -std::expm1(-a);  // 1 - e^{-a}
  if (a > 1e-4) {
    w.w1 = w.w0 - (1.0 - w.decay * (1.0 + a)) / a;
  } else {
    // 1 - (1 - e^{-a}(1+a))/a = 1 - a/2 + a^2/3 - ... minus (1 - e^{-a}) terms
    w.w1 = w.w0 - a * (0.5 - a * (1.0 / 3.0 - a * 0.125));
  }
  return w;
}

}  // namespace

Vec exp_filter(const Vec& samples, double sigma, const TimeGrid& grid) {
  if (!(sigma > 0.0)) throw std::invalid_argument("exp_filter: sigma must be positive");
  const StepWeights w = step_weights(sigma, grid.dt());
  Vec y(samples.size());
  y[0] = 0.0;
  for (int k = 0; k + 1 < samples.size(); ++k)
    y[k + 1] = w.decay * y[k] + w.w0 * samples[k] + w.w1 * (samples[k + 1] - samples[k]);
  return y;
}

Mat exp_filter_cols(const Mat& samples, double sigma, const TimeGrid& grid) {
  if (!(sigma > 0.0)) throw std::invalid_argument("exp_filter: sigma must be positive");
  const StepWeights w = step_weights(sigma, grid.dt());
  Mat y(samples.rows(), samples.cols());
  y.row(0).setZero();
  for (int k = 0; k + 1 < samples.rows(); ++k)
    y.row(k + 1) = w.decay * y.row(k) + w.w0 * samples.row(k) +
                   w.w1 * (samples.row(k + 1) - samples.row(k));
  return y;
}

FilteredSignals build_filtered(const Trajectory& traj, const BasisSet& basis,
                               double sigma) {
  const int n = traj.grid.points();
  FilteredSignals sig;
  sig.sigma = sigma;
  sig.psi_rev.resize(n, basis.dim);
  sig.cost_rev.resize(n);
  sig.h0_rev.resize(n);
  sig.terminal_term.resize(n);
  for (int k = 0; k < n; ++k) {
    const int fwd = n - 1 - k;  // r_k = T - t_{N-k}
    const double t = traj.grid.time(fwd);
    sig.psi_rev.row(k) = basis.features(traj.x[fwd], traj.u[fwd], t);
    sig.cost_rev[k] = traj.cost_samples[fwd];
    sig.h0_rev[k] = basis.offset_at(traj.x[fwd], traj.u[fwd], t);
    sig.terminal_term[k] =
        sigma * std::exp(-sigma * traj.grid.time(k)) * traj.terminal_cost;
  }
  sig.psi_filt = exp_filter_cols(sig.psi_rev, sigma, traj.grid);
  sig.cost_filt = exp_filter(sig.cost_rev, sigma, traj.grid);
  sig.h0_filt = exp_filter(sig.h0_rev, sigma, traj.grid);
  return sig;
}

}  // namespace qode
