#pragma once

// Uniform high-probability bound on the GP prediction error,
//   |f_i(x) - mu_i(x)| <= sqrt(beta) sigma_i(x) + gamma_i   for all x in X,
// and the extremal values of its norm over the domain.

#include "delaygp/gp_regression.hpp"
#include "delaygp/types.hpp"

namespace delaygp {

struct BoundParams {
  double delta = 0.01;  // confidence parameter in (0, 1)
  double tau = 1e-3;    // grid factor of the covering argument
  BoxDomain domain;

  void validate() const;
};

struct LipschitzConstants {
  double l_f = 0.0;
  double l_mu = 0.0;
  double l_sigma = 0.0;
};

/// Lipschitz constants of the posterior mean and std, one entry per output.
struct ModelLipschitz {
  Vector l_mu;
  Vector l_sigma;
};

struct EtaBound {
  double beta = 0.0;
  Vector gamma_per_dim;
  double eta_sup = 0.0;
  double eta_inf = 0.0;
};

enum class GammaMode { per_dimension, shared };

/// beta = 2 sum_j log(sqrt(d) / (2 tau) * (hi_j - lo_j) + 1) - 2 log(delta), d = box dimension.
double compute_beta(double delta, double tau, const BoxDomain& box);
double compute_beta(const BoundParams& bp);

/// gamma = (sqrt(beta) L_sigma + L_f + L_mu) tau.
double compute_gamma(double beta, const LipschitzConstants& lip, double tau);

/// || [sqrt(beta) sigma_i(x) + gamma_i]_i ||.
double eta_at(const GpModel& model, const Vector& x, const EtaBound& eb);

/// Max finite-difference Jacobian norm of `fn` over a grid, times `safety`.
/// Throws InvalidArgument if the grid has a single point on some axis.
double estimate_lipschitz_grid(const VectorField& fn, std::size_t out_dim, const BoxDomain& box, double grid_step,
                               double safety = 1.1);

/// Per-output Lipschitz constants of mu_i and sigma_i on the grid, times `safety`.
ModelLipschitz estimate_lipschitz_grid(const GpModel& model, const BoxDomain& box, double grid_step,
                                       double safety = 1.1);

struct EtaExtrema {
  double eta_sup = 0.0;
  double eta_inf = 0.0;
};

/// eta_sup is the grid maximum of ||eta(x)||; eta_inf is the closed form
/// || [sqrt(beta) sigma_o,i + gamma_i]_i ||.
EtaExtrema eta_extrema(const GpModel& model, double beta, const Vector& gamma_per_dim, const BoxDomain& box,
                       double grid_step);

struct EtaBoundOptions {
  BoundParams bound;
  double l_f = 0.0;
  double grid_step = 0.0;  // <= 0 selects bound.tau
  double safety = 1.1;
  GammaMode gamma_mode = GammaMode::per_dimension;
};

/// Full pipeline: beta, model Lipschitz constants, gamma, then extrema.
/// Grid posterior values are computed once and shared by both grid steps.
EtaBound make_eta_bound(const GpModel& model, const EtaBoundOptions& opts);

}  // namespace delaygp
