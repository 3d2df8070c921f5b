#include "delaygp/types.hpp"

#include "delaygp/errors.hpp"

#include <algorithm>
#include <cmath>

namespace delaygp {

BoxDomain::BoxDomain(std::vector<Interval> axes) : axes_(std::move(axes)) {
  for (const auto& a : axes_) {
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || a.lo > a.hi) {
      throw InvalidArgument("box axis bounds must be finite with lo <= hi");
    }
  }
}

BoxDomain BoxDomain::cube(std::size_t dim, double lo, double hi) {
  return BoxDomain(std::vector<Interval>(dim, Interval{lo, hi}));
}

bool BoxDomain::is_proper() const {
  return !axes_.empty() && std::all_of(axes_.begin(), axes_.end(), [](const Interval& a) { return a.lo < a.hi; });
}

bool BoxDomain::contains(const Vector& x, double slack) const {
  if (static_cast<std::size_t>(x.size()) != axes_.size()) return false;
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    const double v = x(static_cast<Eigen::Index>(j));
    if (!(v >= axes_[j].lo - slack && v <= axes_[j].hi + slack)) return false;
  }
  return true;
}

double BoxDomain::max_norm() const {
  double sq = 0.0;
  for (const auto& a : axes_) {
    const double m = std::max(std::abs(a.lo), std::abs(a.hi));
    sq += m * m;
  }
  return std::sqrt(sq);
}

BoxDomain BoxDomain::scaled(double factor) const {
  std::vector<Interval> out;
  out.reserve(axes_.size());
  for (const auto& a : axes_) {
    const double c = 0.5 * (a.lo + a.hi);
    const double h = 0.5 * a.width() * factor;
    out.push_back({c - h, c + h});
  }
  return BoxDomain(std::move(out));
}

}  // namespace delaygp
