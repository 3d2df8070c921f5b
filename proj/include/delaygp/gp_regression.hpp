#pragma once

#include "delaygp/types.hpp"

#include <cstddef>
#include <vector>

namespace delaygp {

/// Hyperparameters of the squared-exponential kernel
/// k(x, x') = signal_std^2 exp(-||x - x'||^2 / (2 lengthscale^2)).
struct KernelParams {
  double signal_std = 1.0;
  double lengthscale = 0.2;

  void validate() const;
};

/// Throws InvalidArgument on dimension mismatch.
double squared_exponential(const Vector& a, const Vector& b, const KernelParams& params);

/// Raw training data: states and noisy observations of the unknown function.
struct TrainingSet {
  std::vector<Vector> inputs;
  std::vector<Vector> targets;
  Vector noise_std;  // one entry per output dimension

  std::size_t size() const { return inputs.size(); }

  /// Equal lengths, consistent dimensions, positive noise, inputs inside `domain`.
  void validate(const BoxDomain& domain) const;
};

struct Posterior {
  Vector mean;
  Vector std;
  Vector variance_raw;  // before clamping at zero
};

/// Exact GP regression, one independent GP per output dimension.
///
/// All output dimensions share the training inputs, so a single Cholesky
/// factor of K + sigma^2 I is kept for every group of dimensions with equal
/// noise level. Samples are appended and removed by extending or
/// downdating the triangular factor; a full refactorization runs whenever a
/// pivot degenerates or a probe-based reconstruction check exceeds
/// `kReconstructionTolerance`.
///
/// The class has value semantics. Copies are independent, const members are
/// safe to call concurrently, and mutation must be serialized by the caller.
class GpModel {
 public:
  static constexpr double kReconstructionTolerance = 1e-8;

  GpModel(KernelParams params, BoxDomain domain, Vector noise_std);

  /// Batch fit from scratch.
  static GpModel fit(KernelParams params, BoxDomain domain, const TrainingSet& data);

  /// Throws DomainViolation if `x` is outside the domain.
  void add_sample(const Vector& x, const Vector& y);

  /// Throws InvalidArgument if `index >= size()`.
  void delete_sample(std::size_t index);

  /// Rebuilds every factor from the stored Gram matrix.
  void refactorize();

  /// Posterior mean only, O(N) per query.
  Vector mean(const Vector& x) const;

  /// Mean and clamped standard deviation, O(N^2) per query.
  Posterior posterior(const Vector& x) const;

  std::size_t size() const { return size_; }
  std::size_t input_dim() const { return domain_.dim(); }
  std::size_t output_dim() const { return static_cast<std::size_t>(noise_std_.size()); }

  const KernelParams& params() const { return params_; }
  const BoxDomain& domain() const { return domain_; }
  const Vector& noise_std() const { return noise_std_; }

  Vector input(std::size_t i) const { return inputs_.row(static_cast<Eigen::Index>(i)).transpose(); }
  Vector target(std::size_t i) const { return targets_.row(static_cast<Eigen::Index>(i)).transpose(); }
  TrainingSet training_set() const;

  /// Number of distinct Cholesky factors (1 when all noise levels agree).
  std::size_t factor_count() const { return factors_.size(); }

  /// Exact max over factors of ||L L^T - (K + sigma^2 I)||_F / ||K + sigma^2 I||_F.
  double reconstruction_error() const;

  /// Smallest diagonal entry over all factors (+inf for an empty model).
  double min_factor_diagonal() const;

  /// Count of automatic full refactorizations since construction.
  std::size_t refactorization_count() const { return refactorizations_; }

 private:
  struct Factor {
    double noise_var = 0.0;
    std::vector<Eigen::Index> dims;  // output dimensions served by this factor
    Matrix chol;                     // capacity x capacity, leading size_ block is used
    Matrix weights;                  // capacity x dims.size(), (K + sigma^2 I)^{-1} y
  };

  void reserve(std::size_t capacity);
  Vector kernel_vector(const Vector& x) const;
  void solve_weights(Factor& factor) const;
  bool probe_check(const Factor& factor) const;
  void factorize(Factor& factor) const;

  KernelParams params_;
  BoxDomain domain_;
  Vector noise_std_;
  std::size_t size_ = 0;
  Matrix inputs_;   // capacity x dim
  Matrix targets_;  // capacity x outputs
  Matrix gram_;     // capacity x capacity, noise-free K
  std::vector<Factor> factors_;
  std::size_t refactorizations_ = 0;
};

GpModel with_sample(GpModel model, const Vector& x, const Vector& y);
GpModel without_sample(GpModel model, std::size_t index);

}  // namespace delaygp
