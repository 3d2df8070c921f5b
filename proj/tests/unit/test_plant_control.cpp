#include "delaygp/errors.hpp"
#include "delaygp/plant_control.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace delaygp;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

/// Random Hurwitz matrix: random orthogonal similarity of a block-diagonal
/// matrix with eigenvalues shifted into the open left half plane.
Matrix random_hurwitz(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = g(rng);
  Eigen::ComplexEigenSolver<Matrix> es(m);
  const double shift = es.eigenvalues().real().maxCoeff() + 0.1 + std::abs(g(rng));
  return m - shift * Matrix::Identity(n, n);
}

}  // namespace

TEST_CASE("companion matrices") {
  const Companion c = build_companion(diagonal_gains({-2.0, -2.0}, 1), 2, 1);
  CHECK(c.a == mat2(0, 1, -2, -2));
  CHECK(c.b.size() == 2);
  CHECK(c.b(0) == 0.0);
  CHECK(c.b(1) == 1.0);

  const Companion first = build_companion(diagonal_gains({-1.0}, 1), 1, 1);
  CHECK(first.a(0, 0) == -1.0);
  CHECK(first.b(0, 0) == 1.0);

  const Companion big = build_companion(diagonal_gains({-1.0, -3.0, -3.0}, 2), 3, 2);
  CHECK(big.a.rows() == 6);
  CHECK(big.a.block(0, 2, 2, 2) == Matrix::Identity(2, 2));
  CHECK(big.a.block(4, 0, 2, 2) == -Matrix::Identity(2, 2));
  CHECK(big.b.block(4, 0, 2, 2) == Matrix::Identity(2, 2));

  CHECK_THROWS_AS(build_companion(diagonal_gains({-2.0}, 1), 2, 1), InvalidArgument);
}

TEST_CASE("Hurwitz test on the closed-loop matrix") {
  const Matrix a = mat2(0, 1, -2, -2);
  Eigen::EigenSolver<Matrix> es(a);
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(es.eigenvalues()(i).real() == doctest::Approx(-1.0));
    CHECK(std::abs(es.eigenvalues()(i).imag()) == doctest::Approx(1.0));
  }
  CHECK(is_hurwitz(a));
  CHECK_FALSE(is_hurwitz(mat2(0, 1, 2, -2)));
  CHECK_FALSE(is_hurwitz(mat2(0, 1, -1, 0)));
}

TEST_CASE("Lyapunov solutions") {
  const Matrix p = solve_lyapunov(mat2(0, 1, -2, -2), Matrix::Identity(2, 2));
  CHECK((p - mat2(1.25, 0.25, 0.25, 0.375)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(p == p.transpose());

  const Matrix half = solve_lyapunov(-Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  CHECK((half - 0.5 * Matrix::Identity(3, 3)).norm() <= 1e-14);

  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    const Matrix a = random_hurwitz(rng, n);
    Matrix r = Matrix::Random(n, n);
    const Matrix q = r * r.transpose() + Matrix::Identity(n, n);
    const Matrix s = solve_lyapunov(a, q);
    CHECK((a.transpose() * s + s * a + q).norm() <= 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("Lyapunov rejects unstable systems and bad shapes") {
  CHECK_THROWS_AS(solve_lyapunov(mat2(0, 1, 2, -2), Matrix::Identity(2, 2)), NoSolution);
  try {
    solve_lyapunov(mat2(1, 0, 0, -1), Matrix::Identity(2, 2));
  } catch (const NoSolution& e) {
    CHECK(std::string(e.what()).find("eigenvalues") != std::string::npos);
  }
  CHECK_THROWS_AS(solve_lyapunov(mat2(-1, 0, 0, -1), mat2(1, 1, 0, 1)), InvalidArgument);
  CHECK_THROWS_AS(solve_lyapunov(mat2(-1, 0, 0, -1), Matrix::Identity(3, 3)), InvalidArgument);
}

TEST_CASE("bound constants of the two-state system") {
  const Companion sys = build_companion(diagonal_gains({-2.0, -2.0}, 1), 2, 1);
  const Matrix q = Matrix::Identity(2, 2);
  const Matrix p = solve_lyapunov(sys.a, q);
  const PlantSpec plant = sin_sigmoid_plant();
  const Reference ref = sinusoid_reference(2, 1, 1.0, 1.0);
  EtaBound eta;
  eta.eta_sup = 0.7;
  eta.eta_inf = 0.05;
  const BoundConstants bc = bound_constants(sys, p, q, 1.1, eta, ref, plant.domain, 0.1);

  // eigenvalues of P are (13 +- sqrt(65)) / 16
  const double l_max = (13.0 + std::sqrt(65.0)) / 16.0;
  const double l_min = (13.0 - std::sqrt(65.0)) / 16.0;
  CHECK(l_max == doctest::Approx(1.31639).epsilon(1e-5));
  CHECK(l_min == doctest::Approx(0.30861).epsilon(1e-4));
  CHECK(bc.xi == doctest::Approx(2.0 * l_max).epsilon(1e-12));
  CHECK(bc.xi == doctest::Approx(2.6328).epsilon(1e-4));
  CHECK(bc.chi == doctest::Approx(std::sqrt(l_max / l_min)).epsilon(1e-12));
  CHECK(bc.chi == doctest::Approx(2.0654).epsilon(1e-4));

  const double a_norm = std::sqrt((9.0 + std::sqrt(65.0)) / 2.0);
  CHECK(spectral_norm(sys.a) == doctest::Approx(a_norm).epsilon(1e-12));
  CHECK(a_norm == doctest::Approx(2.9208).epsilon(1e-4));
  CHECK(plant.domain.max_norm() == doctest::Approx(std::sqrt(4.5)));

  // sup ||x_d|| = 1, sup |q'_{d,2}| = 1, ||[L1 L2]|| = sqrt(8), F_d = 1.
  const double numerator = a_norm * std::sqrt(4.5) + std::sqrt(8.0) * 1.0 + 1.0 + 0.7;
  CHECK(bc.f_numerator == doctest::Approx(numerator).epsilon(1e-9));
  CHECK(bc.f_const == doctest::Approx(numerator / (1.0 - 2.0 * 1.1 * 0.1)).epsilon(1e-9));
  CHECK(bc.f_d == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bc.delay_limit() == doctest::Approx(1.0 / 2.2));

  const double e_bar = tracking_bound_offline(bc);
  CHECK(e_bar == doctest::Approx(bc.chi * bc.xi * (2.0 * 1.1 * bc.f_const * 0.1 + 0.7)).epsilon(1e-14));

  CHECK_THROWS_AS(bound_constants(sys, p, q, 1.1, eta, ref, plant.domain, 0.5), PreconditionViolation);
  CHECK_THROWS_AS(bc.with_delay(1.0 / 2.2), PreconditionViolation);
  CHECK_THROWS_AS(bound_constants(sys, Matrix::Identity(2, 2), q, 1.1, eta, ref, plant.domain, 0.1), InvalidArgument);
}

TEST_CASE("offline bound is affine in the delay when F is held fixed") {
  const Companion sys = build_companion(diagonal_gains({-2.0, -2.0}, 1), 2, 1);
  const Matrix q = Matrix::Identity(2, 2);
  const Matrix p = solve_lyapunov(sys.a, q);
  const Reference ref = sinusoid_reference(2, 1, 1.0, 1.0);
  EtaBound eta;
  eta.eta_sup = 0.4;
  BoundConstants bc = bound_constants(sys, p, q, 1.0, eta, ref, sin_sigmoid_plant().domain, 0.0);
  CHECK(tracking_bound_offline(bc) == doctest::Approx(bc.chi * bc.xi * 0.4));
  const double f = bc.f_const;
  const double at_zero = tracking_bound_offline(bc);
  for (double d : {0.05, 0.1, 0.2}) {
    bc.delta_bar = d;
    CHECK(tracking_bound_offline(bc) - at_zero == doctest::Approx(2.0 * bc.chi * bc.xi * f * d));
  }
  EtaBound none;
  bc = bound_constants(sys, p, q, 1.0, none, ref, sin_sigmoid_plant().domain, 0.0);
  CHECK(tracking_bound_offline(bc) == 0.0);
}

TEST_CASE("reference construction and bounds") {
  const Reference ref = sinusoid_reference(2, 1, 1.0, 1.0);
  CHECK(ref.state(0.0)(0) == doctest::Approx(0.0));
  CHECK(ref.state(0.0)(1) == doctest::Approx(1.0));
  CHECK(ref.feedforward(0.0)(0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(ref.derivative(0.3)(0) == doctest::Approx(std::cos(0.3)));
  CHECK(ref.bounds().state_sup == doctest::Approx(1.0));
  CHECK(ref.bounds().feedforward_sup == doctest::Approx(1.0));

  const Reference fast = sinusoid_reference(3, 2, 0.5, 2.0);
  CHECK(fast.bounds().feedforward_sup == doctest::Approx(0.5 * 8.0 * std::sqrt(2.0)));

  // blocks that break q'_{d,1} = q_{d,2} are rejected
  const Reference::Blocks broken = [](double t) {
    Vector v(3);
    v << std::sin(t), 2.0 * std::cos(t), -std::sin(t);
    return v;
  };
  CHECK_THROWS_AS(Reference(2, 1, broken, std::nullopt), InvalidArgument);

  const Reference::Blocks poly = [](double t) {
    Vector v(3);
    v << std::sin(0.5 * t), 0.5 * std::cos(0.5 * t), -0.25 * std::sin(0.5 * t);
    return v;
  };
  const Reference estimated(2, 1, poly, std::nullopt, 20.0);
  CHECK(estimated.bounds().state_sup == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(estimated.bounds().feedforward_sup == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("control law") {
  const PlantSpec plant = sin_sigmoid_plant();
  const Reference ref = sinusoid_reference(2, 1, 1.0, 1.0);
  const ControllerGains gains = diagonal_gains({-2.0, -2.0}, 1);

  Vector x0(2);
  x0 << 0.0, 1.0;
  const Vector f_hat = Vector::Constant(1, 0.37);
  CHECK(control_input(0.0, x0, ref, f_hat, gains)(0) == doctest::Approx(-0.37));

  const double t = 1.3;
  const Vector xd = ref.state(t);
  const Vector exact = plant.f(xd);
  const Vector u = control_input(t, xd, ref, exact, gains);
  CHECK(u(0) == doctest::Approx(-std::sin(t) - exact(0)));
  const Vector dx = closed_loop_rhs(t, xd, exact, plant, ref, gains);
  CHECK((dx - ref.derivative(t)).norm() <= 1e-14);

  Vector x(2);
  x << 0.4, -0.2;
  const Vector u0 = control_input(t, x, ref, Vector::Zero(1), gains);
  CHECK(u0(0) == doctest::Approx(-std::sin(t) - 2.0 * (0.4 - std::sin(t)) - 2.0 * (-0.2 - std::cos(t))));
  CHECK_THROWS_AS(control_input(t, Vector::Zero(3), ref, Vector::Zero(1), gains), InvalidArgument);
}

TEST_CASE("plant definitions") {
  const PlantSpec p = sin_sigmoid_plant();
  Vector x(2);
  x << 0.5, -1.0;
  CHECK(p.f(x)(0) == doctest::Approx(std::sin(0.5) + 0.5 / (1.0 + std::exp(-0.1))));
  CHECK(p.state_dim() == 2);
  const PlantSpec z = zero_plant(3, 2);
  CHECK(z.state_dim() == 6);
  CHECK(z.f(Vector::Ones(6)).norm() == 0.0);
  PlantSpec bad = p;
  bad.f = nullptr;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
