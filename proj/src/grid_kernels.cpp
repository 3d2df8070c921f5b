#include "delaygp/grid_kernels.hpp"

#include "delaygp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace delaygp {

namespace {

using Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

// Finite-difference Jacobian (rows = outputs, cols = axes) at one grid point.
Matrix fd_jacobian(const Grid& grid, const Matrix& values, std::size_t g) {
  Matrix jac(values.rows(), idx(grid.dim()));
  for (std::size_t axis = 0; axis < grid.dim(); ++axis) {
    const std::size_t up = grid.upper_neighbor(g, axis);
    const double h = grid.spacing(axis);
    if (up < grid.size()) {
      jac.col(idx(axis)) = (values.col(idx(up)) - values.col(idx(g))) / h;
    } else {
      const std::size_t down = grid.lower_neighbor(g, axis);
      jac.col(idx(axis)) = (values.col(idx(g)) - values.col(idx(down))) / h;
    }
  }
  return jac;
}

double spectral_norm_small(const Matrix& m) {
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double eta_norm_at(const Matrix& std_values, Index g, double sqrt_beta, const Vector& gamma) {
  return (sqrt_beta * std_values.col(g) + gamma).norm();
}

}  // namespace

Grid::Grid(const BoxDomain& box, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("grid step must be positive and finite");
  if (box.dim() == 0) throw InvalidArgument("grid needs at least one axis");
  total_ = 1;
  for (std::size_t j = 0; j < box.dim(); ++j) {
    const Interval& a = box.axis(j);
    const auto count = static_cast<std::size_t>(std::floor(a.width() / step + 1e-9)) + 1;
    if (count < 2) {
      throw InvalidArgument("grid step " + std::to_string(step) + " leaves a single point on axis " +
                            std::to_string(j));
    }
    lo_.push_back(a.lo);
    counts_.push_back(count);
    spacing_.push_back(a.width() / static_cast<double>(count - 1));
    strides_.push_back(total_);
    total_ *= count;
  }
}

Vector Grid::point(std::size_t flat) const {
  Vector p(idx(dim()));
  for (std::size_t j = 0; j < dim(); ++j) {
    const std::size_t k = (flat / strides_[j]) % counts_[j];
    p(idx(j)) = lo_[j] + static_cast<double>(k) * spacing_[j];
  }
  return p;
}

std::size_t Grid::upper_neighbor(std::size_t flat, std::size_t axis) const {
  const std::size_t k = (flat / strides_[axis]) % counts_[axis];
  return k + 1 < counts_[axis] ? flat + strides_[axis] : total_;
}

std::size_t Grid::lower_neighbor(std::size_t flat, std::size_t axis) const {
  const std::size_t k = (flat / strides_[axis]) % counts_[axis];
  return k > 0 ? flat - strides_[axis] : total_;
}

namespace serial {

Matrix evaluate(const Grid& grid, const VectorField& fn, std::size_t out_dim) {
  Matrix values(idx(out_dim), idx(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) values.col(idx(g)) = fn(grid.point(g));
  return values;
}

GridPosterior posterior(const GpModel& model, const Grid& grid) {
  const Index outputs = idx(model.output_dim());
  GridPosterior out{Matrix(outputs, idx(grid.size())), Matrix(outputs, idx(grid.size()))};
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const Posterior p = model.posterior(grid.point(g));
    out.mean.col(idx(g)) = p.mean;
    out.std.col(idx(g)) = p.std;
  }
  return out;
}

Vector max_gradient_norms(const Grid& grid, const Matrix& values) {
  Vector best = Vector::Zero(values.rows());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    best = best.cwiseMax(fd_jacobian(grid, values, g).rowwise().norm());
  }
  return best;
}

double max_jacobian_norm(const Grid& grid, const Matrix& values) {
  double best = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    best = std::max(best, spectral_norm_small(fd_jacobian(grid, values, g)));
  }
  return best;
}

double max_eta_norm(const Matrix& std_values, double beta, const Vector& gamma) {
  const double sb = std::sqrt(beta);
  double best = 0.0;
  for (Index g = 0; g < std_values.cols(); ++g) best = std::max(best, eta_norm_at(std_values, g, sb, gamma));
  return best;
}

}  // namespace serial

namespace omp {

Matrix evaluate(const Grid& grid, const VectorField& fn, std::size_t out_dim) {
  Matrix values(idx(out_dim), idx(grid.size()));
  const auto n = static_cast<long long>(grid.size());
#pragma omp parallel for schedule(static)
  for (long long g = 0; g < n; ++g) values.col(g) = fn(grid.point(static_cast<std::size_t>(g)));
  return values;
}

GridPosterior posterior(const GpModel& model, const Grid& grid) {
  const Index outputs = idx(model.output_dim());
  GridPosterior out{Matrix(outputs, idx(grid.size())), Matrix(outputs, idx(grid.size()))};
  const auto n = static_cast<long long>(grid.size());
#pragma omp parallel for schedule(static)
  for (long long g = 0; g < n; ++g) {
    const Posterior p = model.posterior(grid.point(static_cast<std::size_t>(g)));
    out.mean.col(g) = p.mean;
    out.std.col(g) = p.std;
  }
  return out;
}

Vector max_gradient_norms(const Grid& grid, const Matrix& values) {
  Vector best = Vector::Zero(values.rows());
  const auto n = static_cast<long long>(grid.size());
#pragma omp parallel
  {
    Vector local = Vector::Zero(values.rows());
#pragma omp for schedule(static) nowait
    for (long long g = 0; g < n; ++g) {
      local = local.cwiseMax(fd_jacobian(grid, values, static_cast<std::size_t>(g)).rowwise().norm());
    }
#pragma omp critical
    best = best.cwiseMax(local);
  }
  return best;
}

double max_jacobian_norm(const Grid& grid, const Matrix& values) {
  double best = 0.0;
  const auto n = static_cast<long long>(grid.size());
#pragma omp parallel for schedule(static) reduction(max : best)
  for (long long g = 0; g < n; ++g) {
    best = std::max(best, spectral_norm_small(fd_jacobian(grid, values, static_cast<std::size_t>(g))));
  }
  return best;
}

double max_eta_norm(const Matrix& std_values, double beta, const Vector& gamma) {
  const double sb = std::sqrt(beta);
  double best = 0.0;
  const auto n = static_cast<long long>(std_values.cols());
#pragma omp parallel for schedule(static) reduction(max : best)
  for (long long g = 0; g < n; ++g) best = std::max(best, eta_norm_at(std_values, g, sb, gamma));
  return best;
}

}  // namespace omp

}  // namespace delaygp
