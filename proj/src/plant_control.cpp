#include "delaygp/plant_control.hpp"

#include "delaygp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

namespace delaygp {

namespace {

using Eigen::Index;

Matrix symmetric_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double max_eigenvalue_spd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eigenvalue_spd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::string eigenvalue_report(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  std::ostringstream os;
  os << "eigenvalues:";
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> ev = es.eigenvalues()(i);
    os << ' ' << ev.real() << (ev.imag() < 0 ? "-" : "+") << std::abs(ev.imag()) << 'i';
  }
  return os.str();
}

void check_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw InvalidArgument(std::string(what) + " must be square");
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > 1e-12 * scale) throw InvalidArgument(std::string(what) + " must be symmetric");
}

}  // namespace

void PlantSpec::validate() const {
  if (order < 1 || dim < 1) throw InvalidArgument("plant order and dimension must be at least 1");
  if (!f) throw InvalidArgument("plant nonlinearity is not set");
  if (static_cast<int>(domain.dim()) != state_dim()) {
    throw InvalidArgument("plant domain dimension must equal order * dim");
  }
}

PlantSpec sin_sigmoid_plant() {
  PlantSpec p;
  p.order = 2;
  p.dim = 1;
  p.f = [](const Vector& x) {
    Vector out(1);
    out(0) = std::sin(x(0)) + 0.5 / (1.0 + std::exp(x(1) / 10.0));
    return out;
  };
  p.domain = BoxDomain::cube(2, -1.5, 1.5);
  return p;
}

PlantSpec zero_plant(int order, int dim) {
  PlantSpec p;
  p.order = order;
  p.dim = dim;
  p.f = [dim](const Vector&) { return Vector::Zero(dim); };
  p.domain = BoxDomain::cube(static_cast<std::size_t>(order * dim), -1.5, 1.5);
  return p;
}

Reference::Reference(int order, int dim, Blocks blocks, std::optional<ReferenceBounds> declared, double horizon)
    : order_(order), dim_(dim), blocks_(std::move(blocks)) {
  if (order < 1 || dim < 1) throw InvalidArgument("reference order and dimension must be at least 1");
  if (!blocks_) throw InvalidArgument("reference callable is not set");
  if (!(horizon > 0.0)) throw InvalidArgument("reference horizon must be positive");
  const Index n = dim;
  const Index expect = static_cast<Index>(order + 1) * n;
  if (blocks_(0.0).size() != expect) throw InvalidArgument("reference must return (m + 1) * n values");

  // Chain check q'_{d,i} = q_{d,i+1} by central differences.
  constexpr int kSamples = 64;
  constexpr double kStep = 1e-4;
  for (int s = 0; s < kSamples; ++s) {
    const double t = kStep + horizon * static_cast<double>(s) / (kSamples - 1);
    const Vector fd = (blocks_(t + kStep) - blocks_(t - kStep)) / (2.0 * kStep);
    const Vector q = blocks_(t);
    for (int i = 0; i < order; ++i) {
      const auto lhs = fd.segment(i * n, n);
      const auto rhs = q.segment((i + 1) * n, n);
      const double tol = 1e-6 * std::max(1.0, rhs.cwiseAbs().maxCoeff());
      if ((lhs - rhs).cwiseAbs().maxCoeff() > tol) {
        std::ostringstream os;
        os << "reference violates the derivative chain at block " << i + 1 << ", t = " << t;
        throw InvalidArgument(os.str());
      }
    }
  }

  if (declared) {
    bounds_ = *declared;
  } else {
    const double dt = 1e-3;
    const auto steps = static_cast<long>(std::ceil(horizon / dt));
    for (long k = 0; k <= steps; ++k) {
      const double t = std::min(horizon, static_cast<double>(k) * dt);
      bounds_.state_sup = std::max(bounds_.state_sup, state(t).norm());
      bounds_.feedforward_sup = std::max(bounds_.feedforward_sup, feedforward(t).norm());
      bounds_.derivative_sup = std::max(bounds_.derivative_sup, derivative(t).norm());
    }
  }
}

Vector Reference::state(double t) const { return blocks_(t).head(order_ * dim_); }
Vector Reference::feedforward(double t) const { return blocks_(t).segment(order_ * dim_, dim_); }
Vector Reference::derivative(double t) const { return blocks_(t).tail(order_ * dim_); }

Reference sinusoid_reference(int order, int dim, double amplitude, double omega) {
  auto blocks = [order, dim, amplitude, omega](double t) {
    Vector out(static_cast<Index>((order + 1) * dim));
    for (int i = 0; i <= order; ++i) {
      const double v = amplitude * std::pow(omega, i) * std::sin(omega * t + i * std::numbers::pi / 2.0);
      out.segment(i * dim, dim).setConstant(v);
    }
    return out;
  };
  // Blocks alternate between +-sin and +-cos, so the squared norm of blocks
  // [lo, hi) is n a^2 (S_even sin^2 + S_odd cos^2).
  auto block_sup = [&](int lo, int hi) {
    double even = 0.0;
    double odd = 0.0;
    for (int i = lo; i < hi; ++i) (i % 2 == 0 ? even : odd) += std::pow(omega, 2 * i);
    return std::abs(amplitude) * std::sqrt(static_cast<double>(dim) * std::max(even, odd));
  };
  ReferenceBounds b;
  b.state_sup = block_sup(0, order);
  b.derivative_sup = block_sup(1, order + 1);
  b.feedforward_sup = std::abs(amplitude) * std::pow(std::abs(omega), order) * std::sqrt(static_cast<double>(dim));
  return Reference(order, dim, blocks, b);
}

void ControllerGains::validate(int order, int dim) const {
  if (static_cast<int>(lambdas.size()) != order) throw InvalidArgument("need exactly one gain block per order");
  for (const auto& l : lambdas) {
    if (l.rows() != dim || l.cols() != dim) throw InvalidArgument("gain blocks must be n x n");
  }
  if (q_matrix.rows() != order * dim || q_matrix.cols() != order * dim) throw InvalidArgument("Q must be mn x mn");
  check_symmetric(q_matrix, "Q");
  Eigen::LLT<Matrix> llt(q_matrix);
  if (llt.info() != Eigen::Success) throw InvalidArgument("Q must be positive definite");
}

ControllerGains diagonal_gains(const std::vector<double>& lambdas, int dim) {
  ControllerGains g;
  for (double l : lambdas) g.lambdas.push_back(l * Matrix::Identity(dim, dim));
  const Index s = static_cast<Index>(lambdas.size()) * dim;
  g.q_matrix = Matrix::Identity(s, s);
  return g;
}

Companion build_companion(const ControllerGains& gains, int order, int dim) {
  if (order < 1 || dim < 1) throw InvalidArgument("order and dim must be at least 1");
  if (static_cast<int>(gains.lambdas.size()) != order) throw InvalidArgument("need exactly one gain block per order");
  const Index n = dim;
  const Index s = static_cast<Index>(order) * n;
  Companion c{Matrix::Zero(s, s), Matrix::Zero(s, n)};
  if (order > 1) c.a.topRightCorner(s - n, s - n).setIdentity();
  for (int i = 0; i < order; ++i) {
    const Matrix& l = gains.lambdas[static_cast<std::size_t>(i)];
    if (l.rows() != n || l.cols() != n) throw InvalidArgument("gain blocks must be n x n");
    c.a.block(s - n, i * n, n, n) = l;
  }
  c.b.bottomRows(n).setIdentity();
  return c;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

bool is_hurwitz(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  Eigen::EigenSolver<Matrix> es(a, false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols()) {
    throw InvalidArgument("A and Q must be square and of equal size");
  }
  check_symmetric(q, "Q");
  if (!is_hurwitz(a)) throw NoSolution("A is not Hurwitz; " + eigenvalue_report(a));

  // vec(A^T P + P A) = (I (x) A^T + A^T (x) I) vec(P).
  const Index n = a.rows();
  const Matrix at = a.transpose();
  Matrix kron = Matrix::Zero(n * n, n * n);
  for (Index j = 0; j < n; ++j) {
    kron.block(j * n, j * n, n, n) += at;
    for (Index i = 0; i < n; ++i) kron.block(j * n, i * n, n, n).diagonal().array() += at(j, i);
  }
  const Vector rhs = -Eigen::Map<const Vector>(Matrix(q).data(), n * n);
  const Vector sol = kron.fullPivLu().solve(rhs);
  return symmetric_part(Eigen::Map<const Matrix>(sol.data(), n, n));
}

double BoundConstants::delay_limit() const {
  return l_f > 0.0 ? 1.0 / (2.0 * l_f) : std::numeric_limits<double>::infinity();
}

BoundConstants BoundConstants::with_delay(double new_delta_bar) const {
  if (!(new_delta_bar >= 0.0)) throw InvalidArgument("delay bound must be nonnegative");
  if (!(new_delta_bar < delay_limit())) {
    std::ostringstream os;
    os << "delay bound " << new_delta_bar << " violates delta_bar < 1/(2 L_f) = " << delay_limit();
    throw PreconditionViolation(os.str());
  }
  BoundConstants out = *this;
  out.delta_bar = new_delta_bar;
  out.f_const = f_numerator / (1.0 - 2.0 * l_f * new_delta_bar);
  return out;
}

BoundConstants bound_constants(const Companion& sys, const Matrix& p, const Matrix& q, double l_f, const EtaBound& eta,
                               const Reference& ref, const BoxDomain& domain, double delta_bar) {
  if (!is_hurwitz(sys.a)) throw NoSolution("A is not Hurwitz; " + eigenvalue_report(sys.a));
  check_symmetric(q, "Q");
  check_symmetric(p, "P");
  const double residual = (sys.a.transpose() * p + p * sys.a + q).norm();
  if (residual > 1e-10 * std::max(1.0, q.norm())) throw InvalidArgument("P does not solve A^T P + P A = -Q");
  if (static_cast<Index>(domain.dim()) != sys.a.rows()) throw InvalidArgument("domain dimension must match A");
  if (!(l_f >= 0.0)) throw InvalidArgument("L_f must be nonnegative");

  const double p_max = max_eigenvalue_spd(p);
  const double p_min = min_eigenvalue_spd(p);
  if (!(p_min > 0.0)) throw NoSolution("Lyapunov solution is not positive definite");

  BoundConstants bc;
  bc.p_matrix = p;
  bc.xi = 2.0 * p_max / min_eigenvalue_spd(q);
  bc.chi = std::sqrt(p_max / p_min);
  bc.l_f = l_f;
  bc.eta_sup = eta.eta_sup;
  bc.eta_inf = eta.eta_inf;
  bc.f_d = ref.bounds().derivative_sup;
  const Index n = sys.b.cols();
  const double gain_norm = spectral_norm(sys.a.bottomRows(n));
  bc.f_numerator = spectral_norm(sys.a) * domain.max_norm() + gain_norm * ref.bounds().state_sup +
                   ref.bounds().feedforward_sup + eta.eta_sup;
  return bc.with_delay(delta_bar);
}

double tracking_bound_offline(const BoundConstants& bc) {
  return bc.chi * bc.xi * (2.0 * bc.l_f * bc.f_const * bc.delta_bar + bc.eta_sup);
}

Vector control_input(double t, const Vector& x, const Reference& ref, const Vector& f_hat,
                     const ControllerGains& gains) {
  const Vector q = ref.blocks(t);
  const int m = ref.order();
  const Index n = ref.dim();
  if (x.size() != m * n || f_hat.size() != n) throw InvalidArgument("control_input dimension mismatch");
  Vector u = q.segment(m * n, n) - f_hat;
  for (int i = 0; i < m; ++i) {
    u += gains.lambdas[static_cast<std::size_t>(i)] * (x.segment(i * n, n) - q.segment(i * n, n));
  }
  return u;
}

Vector closed_loop_rhs(double t, const Vector& x, const Vector& f_hat, const PlantSpec& plant, const Reference& ref,
                       const ControllerGains& gains) {
  const Index n = plant.dim;
  const Index s = x.size();
  Vector dx(s);
  if (s > n) dx.head(s - n) = x.tail(s - n);
  dx.tail(n) = plant.f(x) + control_input(t, x, ref, f_hat, gains);
  return dx;
}

}  // namespace delaygp
