#include "delaygp/gp_regression.hpp"

#include "delaygp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace delaygp {

namespace {

using Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

// In-place Cholesky update: L L^T + v v^T, L lower triangular.
// Returns false if a pivot degenerates.
bool rank_one_update(Eigen::Ref<Matrix> lower, Vector v) {
  const Index n = lower.rows();
  for (Index k = 0; k < n; ++k) {
    const double lkk = lower(k, k);
    const double r = std::hypot(lkk, v(k));
    if (!(r > 0.0) || !std::isfinite(r) || !(lkk > 0.0)) return false;
    const double c = r / lkk;
    const double s = v(k) / lkk;
    lower(k, k) = r;
    for (Index i = k + 1; i < n; ++i) {
      lower(i, k) = (lower(i, k) + s * v(i)) / c;
      v(i) = c * v(i) - s * lower(i, k);
    }
  }
  return true;
}

// Deterministic probe in (-1.5, 1.5), no zero entries in practice.
Vector probe_vector(Index n) {
  Vector p(n);
  for (Index i = 0; i < n; ++i) {
    p(i) = std::sin(1.0 + 0.754877666 * static_cast<double>(i)) + 0.5 * std::cos(0.3 * static_cast<double>(i * i));
  }
  return p;
}

}  // namespace

void KernelParams::validate() const {
  if (!(signal_std > 0.0) || !std::isfinite(signal_std)) {
    throw InvalidArgument("kernel signal_std must be positive and finite");
  }
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw InvalidArgument("kernel lengthscale must be positive and finite");
  }
}

double squared_exponential(const Vector& a, const Vector& b, const KernelParams& params) {
  if (a.size() != b.size()) {
    throw InvalidArgument("kernel arguments have dimensions " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()));
  }
  const double sq = (a - b).squaredNorm();
  const double sf2 = params.signal_std * params.signal_std;
  return sf2 * std::exp(-0.5 * sq / (params.lengthscale * params.lengthscale));
}

void TrainingSet::validate(const BoxDomain& domain) const {
  if (inputs.size() != targets.size()) {
    throw InvalidArgument("training set has " + std::to_string(inputs.size()) + " inputs but " +
                          std::to_string(targets.size()) + " targets");
  }
  if (noise_std.size() == 0) throw InvalidArgument("training set needs at least one output dimension");
  for (Index j = 0; j < noise_std.size(); ++j) {
    if (!(noise_std(j) > 0.0)) throw InvalidArgument("noise standard deviations must be positive");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (static_cast<std::size_t>(inputs[i].size()) != domain.dim()) {
      throw InvalidArgument("training input " + std::to_string(i) + " has wrong dimension");
    }
    if (targets[i].size() != noise_std.size()) {
      throw InvalidArgument("training target " + std::to_string(i) + " has wrong dimension");
    }
    if (!domain.contains(inputs[i])) {
      throw DomainViolation("training input " + std::to_string(i) + " lies outside the domain");
    }
  }
}

GpModel::GpModel(KernelParams params, BoxDomain domain, Vector noise_std)
    : params_(params), domain_(std::move(domain)), noise_std_(std::move(noise_std)) {
  params_.validate();
  if (domain_.dim() == 0) throw InvalidArgument("GP domain must have at least one axis");
  if (noise_std_.size() == 0) throw InvalidArgument("GP needs at least one output dimension");
  for (Index j = 0; j < noise_std_.size(); ++j) {
    if (!(noise_std_(j) > 0.0)) throw InvalidArgument("noise standard deviations must be positive");
    const double var = noise_std_(j) * noise_std_(j);
    auto it = std::find_if(factors_.begin(), factors_.end(), [var](const Factor& f) { return f.noise_var == var; });
    if (it == factors_.end()) {
      factors_.push_back(Factor{var, {j}, Matrix(), Matrix()});
    } else {
      it->dims.push_back(j);
    }
  }
  reserve(16);
}

GpModel GpModel::fit(KernelParams params, BoxDomain domain, const TrainingSet& data) {
  data.validate(domain);
  GpModel model(params, std::move(domain), data.noise_std);
  const std::size_t n = data.size();
  model.reserve(std::max<std::size_t>(16, n));
  for (std::size_t i = 0; i < n; ++i) {
    model.inputs_.row(idx(i)) = data.inputs[i].transpose();
    model.targets_.row(idx(i)) = data.targets[i].transpose();
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double k = squared_exponential(data.inputs[i], data.inputs[j], model.params_);
      model.gram_(idx(i), idx(j)) = k;
      model.gram_(idx(j), idx(i)) = k;
    }
  }
  model.size_ = n;
  for (auto& f : model.factors_) {
    model.factorize(f);
    model.solve_weights(f);
  }
  return model;
}

void GpModel::reserve(std::size_t capacity) {
  const Index cap = idx(capacity);
  if (inputs_.rows() >= cap) return;
  const Index n = idx(size_);
  auto grow = [&](Matrix& m, Index rows, Index cols) {
    Matrix next = Matrix::Zero(rows, cols);
    const Index r = std::min(m.rows(), n);
    next.topLeftCorner(r, std::min(m.cols(), cols)) = m.topLeftCorner(r, std::min(m.cols(), cols));
    m.swap(next);
  };
  grow(inputs_, cap, idx(domain_.dim()));
  grow(targets_, cap, noise_std_.size());
  Matrix gram = Matrix::Zero(cap, cap);
  if (n > 0) gram.topLeftCorner(n, n) = gram_.topLeftCorner(n, n);
  gram_.swap(gram);
  for (auto& f : factors_) {
    Matrix chol = Matrix::Zero(cap, cap);
    if (n > 0) chol.topLeftCorner(n, n) = f.chol.topLeftCorner(n, n);
    f.chol.swap(chol);
    grow(f.weights, cap, idx(f.dims.size()));
  }
}

Vector GpModel::kernel_vector(const Vector& x) const {
  const Index n = idx(size_);
  if (x.size() != idx(domain_.dim())) {
    throw InvalidArgument("query has dimension " + std::to_string(x.size()) + ", model expects " +
                          std::to_string(domain_.dim()));
  }
  if (n == 0) return Vector();
  const double sf2 = params_.signal_std * params_.signal_std;
  const double scale = -0.5 / (params_.lengthscale * params_.lengthscale);
  Vector sq = (inputs_.topRows(n).rowwise() - x.transpose()).rowwise().squaredNorm();
  return sf2 * (scale * sq.array()).exp().matrix();
}

void GpModel::factorize(Factor& factor) const {
  const Index n = idx(size_);
  if (n == 0) return;
  Matrix a = gram_.topLeftCorner(n, n);
  a.diagonal().array() += factor.noise_var;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NoSolution("Gram matrix with noise ridge is not positive definite");
  }
  factor.chol.topLeftCorner(n, n) = llt.matrixL();
}

void GpModel::solve_weights(Factor& factor) const {
  const Index n = idx(size_);
  if (n == 0) return;
  Matrix y(n, idx(factor.dims.size()));
  for (std::size_t c = 0; c < factor.dims.size(); ++c) y.col(idx(c)) = targets_.col(factor.dims[c]).head(n);
  const auto lower = factor.chol.topLeftCorner(n, n).triangularView<Eigen::Lower>();
  lower.solveInPlace(y);
  lower.transpose().solveInPlace(y);
  factor.weights.topRows(n) = y;
}

bool GpModel::probe_check(const Factor& factor) const {
  const Index n = idx(size_);
  if (n == 0) return true;
  const Vector p = probe_vector(n);
  const auto lower = factor.chol.topLeftCorner(n, n).triangularView<Eigen::Lower>();
  const Vector lhs = lower * (lower.transpose() * p);
  const Vector rhs = gram_.topLeftCorner(n, n) * p + factor.noise_var * p;
  const double err = (lhs - rhs).norm() / rhs.norm();
  return std::isfinite(err) && err <= kReconstructionTolerance;
}

void GpModel::add_sample(const Vector& x, const Vector& y) {
  if (x.size() != idx(domain_.dim())) throw InvalidArgument("sample input has wrong dimension");
  if (y.size() != noise_std_.size()) throw InvalidArgument("sample target has wrong dimension");
  if (!domain_.contains(x)) throw DomainViolation("sample input lies outside the GP domain");

  if (idx(size_ + 1) > inputs_.rows()) reserve(2 * (size_ + 1));
  const Index n = idx(size_);
  const Vector kvec = kernel_vector(x);
  const double kxx = params_.signal_std * params_.signal_std;

  if (n > 0) {
    gram_.row(n).head(n) = kvec.transpose();
    gram_.col(n).head(n) = kvec;
  }
  gram_(n, n) = kxx;
  inputs_.row(n) = x.transpose();
  targets_.row(n) = y.transpose();

  std::vector<bool> degenerate(factors_.size(), false);
  for (std::size_t fi = 0; fi < factors_.size(); ++fi) {
    Factor& f = factors_[fi];
    double d2 = kxx + f.noise_var;
    if (n > 0) {
      Vector l = f.chol.topLeftCorner(n, n).triangularView<Eigen::Lower>().solve(kvec);
      f.chol.row(n).head(n) = l.transpose();
      d2 -= l.squaredNorm();
    }
    if (d2 > 0.0 && std::isfinite(d2)) {
      f.chol(n, n) = std::sqrt(d2);
    } else {
      degenerate[fi] = true;
    }
  }
  ++size_;

  for (std::size_t fi = 0; fi < factors_.size(); ++fi) {
    Factor& f = factors_[fi];
    if (degenerate[fi] || !probe_check(f)) {
      factorize(f);
      ++refactorizations_;
    }
    solve_weights(f);
  }
}

void GpModel::delete_sample(std::size_t index) {
  if (index >= size_) {
    throw InvalidArgument("delete index " + std::to_string(index) + " out of range for size " + std::to_string(size_));
  }
  const Index n = idx(size_);
  const Index i = idx(index);
  const Index tail = n - 1 - i;

  std::vector<bool> degenerate(factors_.size(), false);
  for (std::size_t fi = 0; fi < factors_.size(); ++fi) {
    Factor& f = factors_[fi];
    // [L11 0 0; l21 d 0; L31 l32 L33] -> [L11 0; L31 L33'] with
    // L33' L33'^T = L33 L33^T + l32 l32^T.
    Vector l32 = f.chol.col(i).segment(i + 1, tail);
    if (tail > 0) {
      if (i > 0) f.chol.block(i, 0, tail, i) = f.chol.block(i + 1, 0, tail, i).eval();
      f.chol.block(i, i, tail, tail) = f.chol.block(i + 1, i + 1, tail, tail).eval();
    }
    f.chol.row(n - 1).setZero();
    f.chol.col(n - 1).setZero();
    if (tail > 0) {
      f.chol.block(i, i, tail, tail).triangularView<Eigen::StrictlyUpper>().setZero();
      degenerate[fi] = !rank_one_update(f.chol.block(i, i, tail, tail), std::move(l32));
    }
  }

  if (tail > 0) {
    gram_.block(i, 0, tail, n) = gram_.block(i + 1, 0, tail, n).eval();
    gram_.block(0, i, n - 1, tail) = gram_.block(0, i + 1, n - 1, tail).eval();
    inputs_.middleRows(i, tail) = inputs_.middleRows(i + 1, tail).eval();
    targets_.middleRows(i, tail) = targets_.middleRows(i + 1, tail).eval();
  }
  gram_.row(n - 1).head(n).setZero();
  gram_.col(n - 1).head(n).setZero();
  --size_;

  for (std::size_t fi = 0; fi < factors_.size(); ++fi) {
    Factor& f = factors_[fi];
    if (degenerate[fi] || !probe_check(f)) {
      factorize(f);
      ++refactorizations_;
    }
    solve_weights(f);
  }
}

void GpModel::refactorize() {
  for (auto& f : factors_) {
    factorize(f);
    solve_weights(f);
  }
}

Vector GpModel::mean(const Vector& x) const {
  Vector out = Vector::Zero(noise_std_.size());
  const Index n = idx(size_);
  const Vector kvec = kernel_vector(x);
  if (n == 0) return out;
  for (const auto& f : factors_) {
    for (std::size_t c = 0; c < f.dims.size(); ++c) out(f.dims[c]) = kvec.dot(f.weights.col(idx(c)).head(n));
  }
  return out;
}

Posterior GpModel::posterior(const Vector& x) const {
  const Index outputs = noise_std_.size();
  const double sf2 = params_.signal_std * params_.signal_std;
  Posterior post{Vector::Zero(outputs), Vector::Constant(outputs, params_.signal_std), Vector::Constant(outputs, sf2)};
  const Index n = idx(size_);
  const Vector kvec = kernel_vector(x);
  if (n == 0) return post;
  for (const auto& f : factors_) {
    const Vector v = f.chol.topLeftCorner(n, n).triangularView<Eigen::Lower>().solve(kvec);
    const double var = sf2 - v.squaredNorm();
    for (std::size_t c = 0; c < f.dims.size(); ++c) {
      const Index d = f.dims[c];
      post.mean(d) = kvec.dot(f.weights.col(idx(c)).head(n));
      post.variance_raw(d) = var;
      post.std(d) = std::sqrt(std::max(var, 0.0));
    }
  }
  return post;
}

TrainingSet GpModel::training_set() const {
  TrainingSet data;
  data.noise_std = noise_std_;
  for (std::size_t i = 0; i < size_; ++i) {
    data.inputs.push_back(input(i));
    data.targets.push_back(target(i));
  }
  return data;
}

double GpModel::reconstruction_error() const {
  const Index n = idx(size_);
  if (n == 0) return 0.0;
  double worst = 0.0;
  for (const auto& f : factors_) {
    const auto lower = f.chol.topLeftCorner(n, n).triangularView<Eigen::Lower>();
    Matrix a = gram_.topLeftCorner(n, n);
    a.diagonal().array() += f.noise_var;
    const Matrix rebuilt = lower * Matrix(lower.transpose());
    worst = std::max(worst, (rebuilt - a).norm() / a.norm());
  }
  return worst;
}

double GpModel::min_factor_diagonal() const {
  const Index n = idx(size_);
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& f : factors_) {
    if (n > 0) smallest = std::min(smallest, f.chol.topLeftCorner(n, n).diagonal().minCoeff());
  }
  return smallest;
}

GpModel with_sample(GpModel model, const Vector& x, const Vector& y) {
  model.add_sample(x, y);
  return model;
}

GpModel without_sample(GpModel model, std::size_t index) {
  model.delete_sample(index);
  return model;
}

}  // namespace delaygp
