#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace delaygp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Map from a state vector to an output vector.
using VectorField = std::function<Vector(const Vector&)>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
};

/// Axis-aligned box X = [lo_1, hi_1] x ... x [lo_d, hi_d].
///
/// Degenerate axes (lo == hi) are representable; callers that need a proper
/// box check `is_proper()`.
class BoxDomain {
 public:
  BoxDomain() = default;
  explicit BoxDomain(std::vector<Interval> axes);

  /// The same interval repeated on `dim` axes.
  static BoxDomain cube(std::size_t dim, double lo, double hi);

  std::size_t dim() const { return axes_.size(); }
  const Interval& axis(std::size_t j) const { return axes_[j]; }
  const std::vector<Interval>& axes() const { return axes_; }

  bool is_proper() const;
  bool contains(const Vector& x, double slack = 1e-12) const;

  /// sup_{x in X} ||x||, attained at the corner farthest from the origin.
  double max_norm() const;

  /// Box scaled about its center by `factor`.
  BoxDomain scaled(double factor) const;

 private:
  std::vector<Interval> axes_;
};

}  // namespace delaygp
