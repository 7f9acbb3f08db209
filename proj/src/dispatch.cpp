#include "qode/dispatch.hpp"

#include <cmath>
#include <cstring>

#include "qode/batch_ops.hpp"
#include "qode/integrate.hpp"

namespace qode {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double log_cosh(double y) {
  const double a = std::abs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - 0.6931471805599453094;
}

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void feed(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  }
  void feed(double v) { feed(&v, sizeof v); }
  void feed(int v) { feed(&v, sizeof v); }
  void feed(const Vec& v) {
    for (int i = 0; i < v.size(); ++i) feed(v[i]);
  }
};

}  // namespace

double NetLoad::value(double t) const {
  double out = mean;
  for (const auto& h : harmonics)
    out += h.amplitude * std::sin(kTwoPi * t / h.period + h.phase);
  return out;
}

double NetLoad::derivative(double t) const {
  double out = 0.0;
  for (const auto& h : harmonics)
    out += h.amplitude * (kTwoPi / h.period) *
           std::cos(kTwoPi * t / h.period + h.phase);
  return out;
}

NetLoad synth_net_load(double mean, std::vector<NetLoad::Harmonic> harmonics) {
  NetLoad load;
  load.mean = mean;
  load.harmonics = std::move(harmonics);
  return load;
}

double DERModel::soft_capacity_cost(int i, double x) const {
  const double w = cap_width;
  return cap_scale[i] *
         (x * x + cap_logcosh_weight * w * w * log_cosh(x / w));
}

double DERModel::soft_capacity_grad(int i, double x) const {
  return cap_scale[i] *
         (2.0 * x + cap_logcosh_weight * cap_width * std::tanh(x / cap_width));
}

double DERModel::terminal_value(const Vec& xa) const {
  const double zs = xa.tail(M).sum();
  const double dz = zs - load.value(horizon);
  double out = k_ell * dz * dz;
  for (int i = 0; i < M; ++i) out += D[i] * xa[i] * xa[i];
  return out;
}

Vec DERModel::terminal_grad(const Vec& xa) const {
  Vec g(2 * M);
  const double zs = xa.tail(M).sum();
  const double dz = 2.0 * k_ell * (zs - load.value(horizon));
  for (int i = 0; i < M; ++i) {
    g[i] = 2.0 * D[i] * xa[i];
    g[M + i] = dz;
  }
  return g;
}

double DERModel::running_cost(const Vec& xa, const Vec& u, double t) const {
  double out = 0.0;
  for (int i = 0; i < M; ++i) out += soft_capacity_cost(i, xa[i]);
  const double du = u.sum() - load.derivative(t);
  const double dz = xa.tail(M).sum() - load.value(t);
  return out + kappa * du * du + kappa_ell * dz * dz;
}

void DERModel::running_cost_grad(const Vec& xa, const Vec& u, double t,
                                 Vec* d_xa, Vec* d_u) const {
  d_xa->resize(2 * M);
  d_u->resize(M);
  const double du = 2.0 * kappa * (u.sum() - load.derivative(t));
  const double dz = 2.0 * kappa_ell * (xa.tail(M).sum() - load.value(t));
  for (int i = 0; i < M; ++i) {
    (*d_xa)[i] = soft_capacity_grad(i, xa[i]);
    (*d_xa)[M + i] = dz;
    (*d_u)[i] = du;
  }
}

double DERModel::generation(const Vec& xa, double t) const {
  return load.value(t) - xa.tail(M).sum();
}

double DERModel::generation_ramp(const Vec& u, double t) const {
  return load.derivative(t) - u.sum();
}

std::uint64_t DERModel::hash() const {
  Fnv f;
  f.feed(M);
  f.feed(alpha);
  f.feed(cap_scale);
  f.feed(cap_logcosh_weight);
  f.feed(cap_width);
  f.feed(kappa);
  f.feed(kappa_ell);
  f.feed(D);
  f.feed(k_ell);
  f.feed(load.mean);
  for (const auto& h : load.harmonics) {
    f.feed(h.amplitude);
    f.feed(h.period);
    f.feed(h.phase);
  }
  f.feed(horizon);
  if (input_box.lo.size() > 0) {
    f.feed(input_box.lo);
    f.feed(input_box.hi);
  }
  return f.h;
}

ControlSystem make_der_system(const DERModel& model) {
  ControlSystem sys;
  sys.state_dim = 2 * model.M;
  sys.input_dim = model.M;
  sys.dynamics = [model](const Vec& xa, const Vec& u, double) {
    const int M = model.M;
    Vec dx(2 * M);
    for (int i = 0; i < M; ++i) {
      dx[i] = -model.alpha[i] * xa[i] - xa[M + i];
      dx[M + i] = u[i];
    }
    return dx;
  };
  sys.running_cost = [model](const Vec& xa, const Vec& u, double t) {
    return model.running_cost(xa, u, t);
  };
  sys.terminal_cost = [model](const Vec& xa) {
    return model.terminal_value(xa);
  };
  if (model.input_box.lo.size() > 0) sys.input_box = model.input_box;
  return sys;
}

DERModel perturb_model(const DERModel& model, double eps,
                       std::mt19937_64& rng) {
  DERModel out = model;
  std::uniform_real_distribution<double> factor(1.0 - eps, 1.0 + eps);
  for (int i = 0; i < out.M; ++i) out.alpha[i] = model.alpha[i] * factor(rng);
  return out;
}

Vec DispatchBasis::eval(double xs, double zs, double t) const {
  const int ns = n_spatial();
  const int nt = n_temporal();
  const double s = horizon - t;
  Vec q(ns);
  q[0] = xs * xs;
  q[1] = xs;
  q[2] = zs * zs;
  q[3] = zs;
  q[4] = 2.0 * xs * zs;
  if (include_constant) q[5] = 1.0;
  Vec p(nt);
  p[0] = s * s;
  for (int j = 1; j < nt; ++j) {
    const double w = kTwoPi * j / horizon;
    p[j] = 1.0 - std::cos(w * s);
  }
  Vec psi(ns * nt);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) psi[i * nt + j] = q[i] * p[j];
  return psi;
}

void DispatchBasis::eval_grads(double xs, double zs, double t, Vec* psi,
                               Vec* d_xs, Vec* d_zs, Vec* d_t) const {
  const int ns = n_spatial();
  const int nt = n_temporal();
  const double s = horizon - t;
  Vec q(ns), qx(ns), qz(ns);
  q[0] = xs * xs;  qx[0] = 2.0 * xs;  qz[0] = 0.0;
  q[1] = xs;       qx[1] = 1.0;       qz[1] = 0.0;
  q[2] = zs * zs;  qx[2] = 0.0;       qz[2] = 2.0 * zs;
  q[3] = zs;       qx[3] = 0.0;       qz[3] = 1.0;
  q[4] = 2.0 * xs * zs;
  qx[4] = 2.0 * zs;
  qz[4] = 2.0 * xs;
  if (include_constant) {
    q[5] = 1.0;
    qx[5] = qz[5] = 0.0;
  }
  Vec p(nt), ps(nt);  // p and dp/ds
  p[0] = s * s;
  ps[0] = 2.0 * s;
  for (int j = 1; j < nt; ++j) {
    const double w = kTwoPi * j / horizon;
    p[j] = 1.0 - std::cos(w * s);
    ps[j] = w * std::sin(w * s);
  }
  const int d = ns * nt;
  if (psi) psi->resize(d);
  d_xs->resize(d);
  d_zs->resize(d);
  d_t->resize(d);
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nt; ++j) {
      const int k = i * nt + j;
      if (psi) (*psi)[k] = q[i] * p[j];
      (*d_xs)[k] = qx[i] * p[j];
      (*d_zs)[k] = qz[i] * p[j];
      (*d_t)[k] = -q[i] * ps[j];  // s = T - t
    }
  }
}

std::vector<int> DispatchBasis::sign_mask() const {
  // Coefficients of the pure quadratics (x_sigma)^2 p_j and (z_sigma)^2 p_j
  // stay nonnegative; every temporal factor is nonnegative on [0, T].
  std::vector<int> mask;
  const int nt = n_temporal();
  for (int j = 0; j < nt; ++j) mask.push_back(0 * nt + j);
  for (int j = 0; j < nt; ++j) mask.push_back(2 * nt + j);
  return mask;
}

BasisSet der_value_class(const DERModel& model, const DispatchBasis& basis,
                         double sigma) {
  BasisSet out;
  out.dim = basis.dim();
  out.sign_mask = basis.sign_mask();
  const int M = model.M;
  out.features = [model, basis, sigma, M](const Vec& xa, const Vec& u,
                                          double t) {
    const double xs = xa.head(M).sum();
    const double zs = xa.tail(M).sum();
    const double us = u.sum();
    const double xs_dot = -model.alpha.dot(xa.head(M)) - zs;
    Vec psi, d_xs, d_zs, d_t;
    basis.eval_grads(xs, zs, t, &psi, &d_xs, &d_zs, &d_t);
    return Vec(-sigma * psi + xs_dot * d_xs + us * d_zs + d_t);
  };
  out.offset = [model, sigma, M](const Vec& xa, const Vec& u, double t) {
    const double zs = xa.tail(M).sum();
    const double us = u.sum();
    double grad_term = 0.0;
    for (int i = 0; i < M; ++i)
      grad_term +=
          2.0 * model.D[i] * xa[i] * (-model.alpha[i] * xa[i] - xa[M + i]);
    grad_term +=
        2.0 * model.k_ell * (zs - model.load.value(model.horizon)) * us;
    return model.running_cost(xa, u, t) - sigma * model.terminal_value(xa) +
           grad_term;
  };
  return out;
}

double der_value(const DERModel& model, const DispatchBasis& basis,
                 const Vec& theta, const Vec& xa, double t) {
  const int M = model.M;
  const Vec psi = basis.eval(xa.head(M).sum(), xa.tail(M).sum(), t);
  return model.terminal_value(xa) + theta.dot(psi);
}

Vec der_value_grad(const DERModel& model, const DispatchBasis& basis,
                   const Vec& theta, const Vec& xa, double t) {
  const int M = model.M;
  Vec d_xs, d_zs, d_t;
  basis.eval_grads(xa.head(M).sum(), xa.tail(M).sum(), t, nullptr, &d_xs,
                   &d_zs, &d_t);
  Vec g = model.terminal_grad(xa);
  const double gx = theta.dot(d_xs);
  const double gz = theta.dot(d_zs);
  for (int i = 0; i < M; ++i) {
    g[i] += gx;
    g[M + i] += gz;
  }
  return g;
}

GeneratedBatch gen_training_batch(const DERModel& model,
                                  const DispatchBasis& basis,
                                  TrainingMode mode, int runs,
                                  const ExplorationSpec& spec,
                                  const TimeGrid& grid, double sigma,
                                  unsigned seed) {
  const int M = model.M;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  const int n_dwell =
      std::max(1, static_cast<int>(std::ceil(grid.horizon / spec.dwell)));
  const double per_class = spec.u_sigma_max / M;

  GeneratedBatch out;
  out.batch.basis = der_value_class(model, basis, sigma);
  // H^theta is an exact quadratic in the aggregate input with curvature
  // kappa > 0 from the offset, and depends on u only through that aggregate.
  AnalyticScalarQuadratic strat{[M](double s) {
    Vec u = Vec::Zero(M);
    u[0] = s;
    return u;
  }};
  // H depends on u only through the aggregate; restrict the reduced scalar
  // to the aggregate range the input box admits.
  if (model.input_box.lo.size() > 0) {
    strat.s_lo = model.input_box.lo.sum();
    strat.s_hi = model.input_box.hi.sum();
  }
  out.batch.strategy = std::move(strat);
  out.batch.sigma = sigma;

  std::vector<Trajectory> trajs;
  for (int run = 0; run < runs; ++run) {
    DERModel plant = model;
    if (mode == TrainingMode::Robust && run > 0)
      plant = perturb_model(model, spec.robust_eps, rng);
    out.model_hashes.push_back(plant.hash());

    Mat levels(n_dwell, M);
    for (int k = 0; k < n_dwell; ++k)
      for (int i = 0; i < M; ++i) levels(k, i) = per_class * unit(rng);
    Vec x0(2 * M);
    for (int i = 0; i < 2 * M; ++i) x0[i] = spec.x0_box * unit(rng);

    const double dwell = spec.dwell;
    auto input = open_loop([levels, dwell, n_dwell](double t) {
      int k = static_cast<int>(t / dwell);
      k = std::min(std::max(k, 0), n_dwell - 1);
      return Vec(levels.row(k).transpose());
    });
    trajs.push_back(integrate(make_der_system(plant), input, x0, grid));
  }
  out.batch.signals = build_filtered_batch(trajs, out.batch.basis, sigma);
  out.batch.trajectories = std::move(trajs);
  out.batch.tol = default_tol(out.batch);
  return out;
}

}  // namespace qode
