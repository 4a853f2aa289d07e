#include <cmath>
#include <random>

#include "doctest.h"
#include "sphvar/reduce.hpp"
#include "sphvar/sphere_geometry.hpp"

using namespace sphvar;

namespace {

Vec random_unit(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> N;
  Vec v(m + 1);
  for (int i = 0; i <= m; ++i) v(i) = N(rng);
  return v.normalized();
}

}  // namespace

TEST_CASE("sphere volumes") {
  const double pi2 = kPi * kPi;
  CHECK(sphere_volume(2) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(sphere_volume(3) == doctest::Approx(2.0 * pi2).epsilon(1e-14));
  CHECK(sphere_volume(5) == doctest::Approx(pi2 * kPi).epsilon(1e-14));
  CHECK(std::abs(build_grid(3, 24).total_weight() - 2.0 * pi2) < 1e-8);
  CHECK(std::abs(build_grid(4, 16).total_weight() - 8.0 * pi2 / 3.0) < 1e-8);
  CHECK(std::abs(build_grid(5, 12).total_weight() - pi2 * kPi) < 1e-8);
  // the error shrinks with resolution
  CHECK(std::abs(build_grid(4, 8).total_weight() - 8.0 * pi2 / 3.0) >
        std::abs(build_grid(4, 16).total_weight() - 8.0 * pi2 / 3.0));
}

TEST_CASE("quadrature integrates polynomials") {
  // int_{S^3} x_0^2 = Vol/4, int x_0^4 = Vol/8
  const QuadratureGrid g = build_grid(3, 32);
  const double vol = 2.0 * kPi * kPi;
  CHECK(integrate(g, [](const Vec& x) { return x(0) * x(0); }) == doctest::Approx(vol / 4).epsilon(1e-9));
  CHECK(integrate(g, [](const Vec& x) { return x(3) * x(3); }) == doctest::Approx(vol / 4).epsilon(1e-9));
  CHECK(integrate(g, [](const Vec& x) { return std::pow(x(1), 4); }) == doctest::Approx(vol / 8).epsilon(1e-9));
  CHECK(std::abs(integrate(g, [](const Vec& x) { return x(1) * x(2); })) < 1e-14);
}

TEST_CASE("grid nodes lie on the sphere") {
  const QuadratureGrid g = build_grid(4, 7);
  CHECK(g.size() == 7u * 7 * 7 * 7);
  for (std::size_t i = 0; i < g.size(); i += 37) CHECK(std::abs(g.node(i).norm() - 1.0) < 1e-14);
  CHECK(g.id() == "S4[7x7x7x7]");
}

TEST_CASE("integrate rejects non-finite densities") {
  const QuadratureGrid g = build_grid(2, 6);
  std::vector<double> d(g.size(), 1.0);
  d[5] = std::nan("");
  CHECK_THROWS_AS(integrate(g, d), NumericalError);
}

TEST_CASE("sphere points validate input") {
  CHECK_THROWS_AS(SpherePoint(Vec::Ones(4)), InvalidArgument);
  CHECK_THROWS_AS(SpherePoint::normalized(Vec::Zero(4)), InvalidArgument);
  CHECK_THROWS_AS(SpherePoint(Vec::Unit(2, 0)), InvalidArgument);  // S^1
  CHECK(SpherePoint::normalized(Vec::Ones(4)).dim() == 3);
}

TEST_CASE("results do not depend on the thread count") {
  const QuadratureGrid g = build_grid(3, 10);
  auto f = [](const Vec& x) { return std::exp(x(0)) * std::sin(3 * x(2)) + x(1) * x(1); };
  set_max_threads(1);
  const double one = integrate(g, f);
  set_max_threads(3);
  const double three = integrate(g, f);
  set_max_threads(0);
  const double all = integrate(g, f);
  CHECK(one == three);
  CHECK(one == all);
}

TEST_CASE("compensated summation") {
  std::vector<double> v = {1e16, 1.0, -1e16, 1.0};
  CHECK(compensated_sum(v) == 2.0);
}

TEST_CASE("charts are inverse to each other and conformal") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const Vec x = random_unit(rng, 3);
    const Chart c = chart_for(x);
    const Vec u = c.to_chart(x);
    CHECK(u.norm() <= 1.0 + 1e-14);
    CHECK((c.to_sphere(u) - x).norm() < 1e-14);
    const Mat B = c.basis(u);
    const Mat G = B.transpose() * B;
    CHECK((G - c.metric(u)).norm() < 1e-13);
    CHECK((G - std::pow(Chart::scale(u), 2) * Mat::Identity(3, 3)).norm() < 1e-13);
  }
}

TEST_CASE("tangent frames are orthonormal and tangent") {
  std::mt19937_64 rng(4);
  for (int m = 2; m <= 5; ++m) {
    const Vec x = random_unit(rng, m);
    const Mat F = tangent_frame(x);
    CHECK((F.transpose() * F - Mat::Identity(m, m)).norm() < 1e-14);
    CHECK((F.transpose() * x).norm() < 1e-14);
  }
}

TEST_CASE("coordinate functions are eigenfunctions") {
  // Delta f = -m f, nabla_X grad f = -f X, sum f^2 = 1, completeness
  std::mt19937_64 rng(5);
  for (int m = 3; m <= 5; ++m) {
    for (int k = 0; k < 10; ++k) {
      const SpherePoint x(random_unit(rng, m));
      const TangentVector X = TangentVector::project(x, random_unit(rng, m));
      double s = 0.0;
      Vec recon = Vec::Zero(m + 1);
      for (int a = 1; a <= m + 1; ++a) {
        const ConformalSample c = conformal_field(a, x);
        auto f = [a](const Vec& y) { return y(a - 1); };
        auto grad = [a](const Vec& y) { return Vec(conformal_field(a, SpherePoint::normalized(y)).grad.vec); };
        CHECK(std::abs(laplacian_fd(f, x) + m * c.f) < 1e-6);
        CHECK((covariant_derivative(grad, X).vec + c.f * X.vec).norm() < 1e-6);
        CHECK((gradient_fd(f, x) - c.grad.vec).norm() < 1e-8);
        s += c.f * c.f;
        recon += X.vec.dot(c.grad.vec) * c.grad.vec;
      }
      CHECK(std::abs(s - 1.0) < 1e-14);
      CHECK((recon - X.vec).norm() < 1e-13);
    }
  }
  CHECK_THROWS_AS(conformal_field(5, SpherePoint(Vec::Unit(4, 0))), InvalidArgument);
}

TEST_CASE("exponential map stays on great circles") {
  const SpherePoint x(Vec::Unit(4, 0));
  const Vec v = Vec::Unit(4, 2);
  const SpherePoint y = sphere_exp(x, v, kPi / 2);
  CHECK((y.coords() - Vec::Unit(4, 2)).norm() < 1e-14);
}
