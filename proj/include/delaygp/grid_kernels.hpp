#pragma once

// Data-parallel sweeps over a rectangular grid of the state domain.
//
// Every kernel exists twice: `serial::` is the plain reference loop kept for
// testing, `omp::` is the OpenMP version used by the library. Both produce
// identical results (the reductions are max operations, which are exact).

#include "delaygp/gp_regression.hpp"
#include "delaygp/types.hpp"

#include <cstddef>
#include <vector>

namespace delaygp {

/// Tensor grid over a box. Axis j holds count_j = floor(width_j / step) + 1
/// evenly spaced points from lo_j to hi_j inclusive, so the realized spacing
/// is never below `step`.
class Grid {
 public:
  /// Throws InvalidArgument unless every axis gets at least two points.
  Grid(const BoxDomain& box, double step);

  std::size_t dim() const { return counts_.size(); }
  std::size_t size() const { return total_; }
  std::size_t count(std::size_t axis) const { return counts_[axis]; }
  double spacing(std::size_t axis) const { return spacing_[axis]; }

  Vector point(std::size_t flat) const;

  /// Flat index of the neighbour one step up along `axis`, or size() if the
  /// point sits on the upper face.
  std::size_t upper_neighbor(std::size_t flat, std::size_t axis) const;
  std::size_t lower_neighbor(std::size_t flat, std::size_t axis) const;

 private:
  std::vector<double> lo_;
  std::vector<double> spacing_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 0;
};

/// Per-point posterior values; column g belongs to grid point g.
struct GridPosterior {
  Matrix mean;  // outputs x grid size
  Matrix std;   // outputs x grid size
};

namespace serial {

Matrix evaluate(const Grid& grid, const VectorField& fn, std::size_t out_dim);
GridPosterior posterior(const GpModel& model, const Grid& grid);

/// Max over the grid of the finite-difference gradient norm of each output row.
Vector max_gradient_norms(const Grid& grid, const Matrix& values);

/// Max over the grid of the spectral norm of the finite-difference Jacobian.
double max_jacobian_norm(const Grid& grid, const Matrix& values);

/// max_g || sqrt(beta) * std(:, g) + gamma ||.
double max_eta_norm(const Matrix& std_values, double beta, const Vector& gamma);

}  // namespace serial

namespace omp {

Matrix evaluate(const Grid& grid, const VectorField& fn, std::size_t out_dim);
GridPosterior posterior(const GpModel& model, const Grid& grid);
Vector max_gradient_norms(const Grid& grid, const Matrix& values);
double max_jacobian_norm(const Grid& grid, const Matrix& values);
double max_eta_norm(const Matrix& std_values, double beta, const Vector& gamma);

}  // namespace omp

}  // namespace delaygp
