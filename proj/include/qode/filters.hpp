#pragma once

#include <algorithm>

#include "qode/basis.hpp"
#include "qode/trajectory.hpp"

namespace qode {

/// Time reversal r = T - t of a sampled sequence. An involution.
template <class Seq>
Seq reversed(const Seq& samples) {
  Seq out = samples;
  std::reverse(out.begin(), out.end());
  return out;
}

inline Vec reversed(const Vec& samples) {
  return samples.reverse().eval();
}

/// Exact discrete solution of ydot = -sigma (y - s(r)), y(0) = 0, assuming
/// linear interpolation of the input between grid points. Stable for any
/// sigma * dt (exponential-integrator update).
Vec exp_filter(const Vec& samples, double sigma, const TimeGrid& grid);

/// Matrix version: each column filtered independently. Rows index grid points.
Mat exp_filter_cols(const Mat& samples, double sigma, const TimeGrid& grid);

/// All reversed/filtered signals of one trajectory under a basis:
/// rows index the reversed time r_k = k * dt.
struct FilteredSignals {
  double sigma = 0.0;
  Mat psi_rev;        // raw reversed features, (N+1) x d
  Mat psi_filt;       // filtered reversed features (the Psi signal)
  Vec cost_rev;       // reversed running-cost samples
  Vec cost_filt;      // the filtered-cost signal C
  Vec h0_rev;         // reversed offset samples h0(x,u,t)
  Vec h0_filt;        // filtered offset signal
  Vec terminal_term;  // sigma * exp(-sigma r) * J0(x_T) per grid point
};

FilteredSignals build_filtered(const Trajectory& traj, const BasisSet& basis,
                               double sigma);

}  // namespace qode
