#include "delaygp/errors.hpp"
#include "delaygp/grid_kernels.hpp"
#include "delaygp/plant_control.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace delaygp;

namespace {

GpModel random_model(std::size_t n, std::uint64_t seed, Eigen::Index outputs = 1) {
  std::mt19937_64 rng(seed);
  GpModel m(KernelParams{}, BoxDomain::cube(2, -1.5, 1.5), Vector::Constant(outputs, 0.01));
  for (std::size_t i = 0; i < n; ++i) {
    m.add_sample(oracle::uniform_point(rng, 2, -1.5, 1.5), oracle::uniform_point(rng, outputs, -1, 1));
  }
  return m;
}

}  // namespace

TEST_CASE("grid layout includes both endpoints") {
  const Grid g(BoxDomain::cube(2, -1.5, 1.5), 0.5);
  CHECK(g.dim() == 2);
  CHECK(g.count(0) == 7);
  CHECK(g.size() == 49);
  CHECK(g.spacing(0) == doctest::Approx(0.5));
  CHECK(g.point(0)(0) == doctest::Approx(-1.5));
  CHECK(g.point(g.size() - 1)(1) == doctest::Approx(1.5));
  CHECK(g.upper_neighbor(g.size() - 1, 0) == g.size());
  CHECK(g.lower_neighbor(0, 1) == g.size());
  const std::size_t up = g.upper_neighbor(0, 1);
  CHECK(g.point(up)(1) - g.point(0)(1) == doctest::Approx(0.5));
}

TEST_CASE("grids with a single point per axis are rejected") {
  CHECK_THROWS_AS(Grid(BoxDomain::cube(2, -1.5, 1.5), 5.0), InvalidArgument);
  CHECK_THROWS_AS(Grid(BoxDomain::cube(1, 0.0, 0.0), 0.1), InvalidArgument);
}

TEST_CASE("serial and OpenMP posteriors agree exactly") {
  const GpModel m = random_model(60, 1, 2);
  const Grid g(m.domain(), 0.1);
  const GridPosterior a = serial::posterior(m, g);
  const GridPosterior b = omp::posterior(m, g);
  CHECK(a.mean == b.mean);
  CHECK(a.std == b.std);
  const Vector x = g.point(17);
  CHECK(a.mean(1, 17) == doctest::Approx(m.posterior(x).mean(1)).epsilon(1e-12));
}

TEST_CASE("serial and OpenMP reductions agree exactly") {
  const GpModel m = random_model(40, 2);
  const Grid g(m.domain(), 0.05);
  const GridPosterior post = serial::posterior(m, g);
  CHECK(serial::max_gradient_norms(g, post.mean) == omp::max_gradient_norms(g, post.mean));
  CHECK(serial::max_gradient_norms(g, post.std) == omp::max_gradient_norms(g, post.std));
  CHECK(serial::max_jacobian_norm(g, post.mean) == omp::max_jacobian_norm(g, post.mean));
  const Vector gamma = Vector::Constant(1, 0.03);
  CHECK(serial::max_eta_norm(post.std, 20.0, gamma) == omp::max_eta_norm(post.std, 20.0, gamma));

  const PlantSpec plant = sin_sigmoid_plant();
  CHECK(serial::evaluate(g, plant.f, 1) == omp::evaluate(g, plant.f, 1));
}

TEST_CASE("finite-difference Jacobian of a linear map") {
  const Grid g(BoxDomain::cube(2, -1.0, 1.0), 0.1);
  Matrix values(2, static_cast<Eigen::Index>(g.size()));
  Matrix j(2, 2);
  j << 1.0, 2.0, -0.5, 0.25;
  for (std::size_t i = 0; i < g.size(); ++i) values.col(static_cast<Eigen::Index>(i)) = j * g.point(i);
  Eigen::JacobiSVD<Matrix> svd(j);
  CHECK(omp::max_jacobian_norm(g, values) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-10));
  const Vector grads = omp::max_gradient_norms(g, values);
  CHECK(grads(0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-10));
  CHECK(grads(1) == doctest::Approx(std::sqrt(0.3125)).epsilon(1e-10));
}
