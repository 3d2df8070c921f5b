#include "delaygp/error_bound.hpp"

#include "delaygp/errors.hpp"
#include "delaygp/grid_kernels.hpp"

#include <cmath>

namespace delaygp {

void BoundParams::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be positive");
  if (!domain.is_proper()) throw InvalidArgument("bound domain needs lo < hi on every axis");
}

double compute_beta(double delta, double tau, const BoxDomain& box) {
  const double d = static_cast<double>(box.dim());
  const double scale = std::sqrt(d) / (2.0 * tau);
  double sum = 0.0;
  for (const auto& a : box.axes()) sum += std::log(scale * a.width() + 1.0);
  return 2.0 * sum - 2.0 * std::log(delta);
}

double compute_beta(const BoundParams& bp) {
  bp.validate();
  return compute_beta(bp.delta, bp.tau, bp.domain);
}

double compute_gamma(double beta, const LipschitzConstants& lip, double tau) {
  return (std::sqrt(beta) * lip.l_sigma + lip.l_f + lip.l_mu) * tau;
}

double eta_at(const GpModel& model, const Vector& x, const EtaBound& eb) {
  const Posterior p = model.posterior(x);
  return (std::sqrt(eb.beta) * p.std + eb.gamma_per_dim).norm();
}

double estimate_lipschitz_grid(const VectorField& fn, std::size_t out_dim, const BoxDomain& box, double grid_step,
                               double safety) {
  const Grid grid(box, grid_step);
  const Matrix values = omp::evaluate(grid, fn, out_dim);
  return safety * omp::max_jacobian_norm(grid, values);
}

ModelLipschitz estimate_lipschitz_grid(const GpModel& model, const BoxDomain& box, double grid_step,
                                       double safety) {
  const Grid grid(box, grid_step);
  const GridPosterior post = omp::posterior(model, grid);
  return {safety * omp::max_gradient_norms(grid, post.mean), safety * omp::max_gradient_norms(grid, post.std)};
}

namespace {

double eta_inf_closed_form(const GpModel& model, double beta, const Vector& gamma_per_dim) {
  return (std::sqrt(beta) * model.noise_std() + gamma_per_dim).norm();
}

}  // namespace

EtaExtrema eta_extrema(const GpModel& model, double beta, const Vector& gamma_per_dim, const BoxDomain& box,
                       double grid_step) {
  const Grid grid(box, grid_step);
  const GridPosterior post = omp::posterior(model, grid);
  return {omp::max_eta_norm(post.std, beta, gamma_per_dim), eta_inf_closed_form(model, beta, gamma_per_dim)};
}

EtaBound make_eta_bound(const GpModel& model, const EtaBoundOptions& opts) {
  const double beta = compute_beta(opts.bound);
  const double step = opts.grid_step > 0.0 ? opts.grid_step : opts.bound.tau;
  const Grid grid(opts.bound.domain, step);
  const GridPosterior post = omp::posterior(model, grid);
  const Vector l_mu = opts.safety * omp::max_gradient_norms(grid, post.mean);
  const Vector l_sigma = opts.safety * omp::max_gradient_norms(grid, post.std);

  const auto outputs = static_cast<Eigen::Index>(model.output_dim());
  Vector gamma(outputs);
  for (Eigen::Index i = 0; i < outputs; ++i) {
    gamma(i) = compute_gamma(beta, {opts.l_f, l_mu(i), l_sigma(i)}, opts.bound.tau);
  }
  if (opts.gamma_mode == GammaMode::shared) {
    gamma.setConstant(compute_gamma(beta, {opts.l_f, l_mu.maxCoeff(), l_sigma.maxCoeff()}, opts.bound.tau));
  }

  EtaBound eb;
  eb.beta = beta;
  eb.gamma_per_dim = gamma;
  eb.eta_sup = omp::max_eta_norm(post.std, beta, gamma);
  eb.eta_inf = eta_inf_closed_form(model, beta, gamma);
  return eb;
}

}  // namespace delaygp
