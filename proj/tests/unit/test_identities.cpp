#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "sphvar/chart_calculus.hpp"
#include "sphvar/identities.hpp"

using namespace sphvar;

namespace {

Mat random_two_form(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> U(-1, 1);
  Mat s = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      s(i, j) = U(rng);
      s(j, i) = -s(i, j);
    }
  return s;
}

Vec gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> N;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = N(rng);
  return v;
}

}  // namespace

TEST_CASE("curvature operator on 2-forms is (2m-4) times the identity") {
  std::mt19937_64 rng(1);
  for (int m = 2; m <= 5; ++m) {
    for (int k = 0; k < 100; ++k) {
      const Mat s = random_two_form(rng, m);
      CHECK((curvature_operator_2form(s) - (2.0 * m - 4.0) * s).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  Mat e12 = Mat::Zero(3, 3);
  e12(0, 1) = 1;
  e12(1, 0) = -1;
  CHECK((curvature_operator_2form(e12) - 2.0 * e12).norm() < 1e-15);
}

TEST_CASE("pullback of the area form is closed") {
  for (const char* id : {"hopf", "poly:1:2:3:2", "compose(hopf,rotate:3:5)"}) {
    CAPTURE(id);
    CHECK(closedness_sup(MapSpec::parse(id), build_grid(3, 6)) < 1e-6);
  }
}

TEST_CASE("weitzenbock formula for phi*Omega") {
  const IdentityReport h = weitzenbock_residual(MapSpec::hopf(), build_grid(3, 12));
  CHECK(h.pass);
  CHECK(h.relative() < 1e-8);
  // d phi*Omega = 0, so int |nabla|^2 = int |delta|^2 - 2 int |phi*Omega|^2 = 4 pi^2
  CHECK(h.terms.at("nabla") == doctest::Approx(4 * kPi * kPi).epsilon(1e-8));
  CHECK(h.terms.at("delta") == doctest::Approx(8 * kPi * kPi).epsilon(1e-8));
  CHECK(h.terms.at("d") < 1e-10);
  const IdentityReport c = weitzenbock_residual(MapSpec::constant(3, 2), build_grid(3, 6));
  CHECK(c.residual == 0.0);
  CHECK(weitzenbock_residual(MapSpec::polynomial(4, 2, 3, 2), build_grid(3, 24)).pass);
  CHECK_THROWS_AS(weitzenbock_residual(MapSpec::identity(3), build_grid(3, 6)), InvalidArgument);
  CHECK(h.to_json()["identity"] == "weitzenbock");
}

TEST_CASE("weitzenbock residual decreases under refinement") {
  const RefinementStudy s = weitzenbock_refinement(MapSpec::polynomial(1, 2, 3, 2), {6, 12});
  CHECK(s.converged());
  CHECK(s.residuals[1] < s.residuals[0]);
  std::ostringstream out;
  s.write_csv(out);
  CHECK(out.str().rfind("resolution,residual\n6,", 0) == 0);
}

TEST_CASE("covariant derivative of the pullback metric") {
  std::mt19937_64 rng(2);
  for (const char* id : {"identity:3", "hopf", "suspension:5:0.5", "poly:2:2:3:3", "poly:5:2:4:2", "rotate:3:1"}) {
    const MapSpec map = MapSpec::parse(id);
    const int m = map.domain_dim();
    for (int k = 0; k < 50; ++k) {
      const SpherePoint x = SpherePoint::normalized(gaussian(rng, m + 1));
      const Vec X = TangentVector::project(x, gaussian(rng, m + 1)).vec;
      const Vec Y = TangentVector::project(x, gaussian(rng, m + 1)).vec;
      const Vec Z = TangentVector::project(x, gaussian(rng, m + 1)).vec;
      CAPTURE(id);
      CHECK(magic_lemma_residual(map, x, X, Y, Z) < 1e-5);
    }
  }
}

TEST_CASE("integrated weitzenbock formula for phi*h") {
  const IdentityReport id = nakauchi_weitzenbock_residual(MapSpec::identity(3), build_grid(3, 8));
  CHECK(id.relative() < 1e-12);
  CHECK(std::abs(id.terms.at("half_nabla_metric")) < 1e-12);
  CHECK(nakauchi_weitzenbock_residual(MapSpec::hopf(), build_grid(3, 12)).relative() < 1e-8);
  CHECK(nakauchi_weitzenbock_residual(MapSpec::polynomial(1, 2, 3, 3), build_grid(3, 24)).pass);
}

TEST_CASE("pointwise inequalities") {
  const auto hopf = inequality_check(MapSpec::hopf(), build_grid(3, 8));
  CHECK(hopf.pass());
  CHECK(hopf.equality_i);
  CHECK(hopf.equality_ii);  // horizontally conformal
  // (i) is an equality for every map into a surface
  CHECK(inequality_check(MapSpec::polynomial(3, 2, 3, 2), build_grid(3, 8)).equality_i);
  CHECK_FALSE(inequality_check(MapSpec::polynomial(3, 2, 3, 3), build_grid(3, 8)).has_i);
  for (double c : {0.5, 0.1}) {
    const auto s = inequality_check(MapSpec::suspension(5, c), build_grid(5, 6));
    CHECK(s.pass());
    CHECK(s.equality_ii);
  }
  const auto poly = inequality_check(MapSpec::polynomial(3, 2, 3, 3), build_grid(3, 12));
  CHECK(poly.pass());
  CHECK(poly.strict_fraction_ii >= 0.99);
  for (std::uint64_t s = 1; s <= 20; ++s) {
    CHECK(inequality_check(MapSpec::polynomial(s, 2 + s % 2, 3, 2 + s % 2), build_grid(3, 6)).pass());
  }
  CHECK(inequality_suite({MapSpec::identity(3), MapSpec::reflection(4)}, 6).size() == 2);
}

TEST_CASE("chart tensors of the pullback metric") {
  // phi*h = g for the identity, so nabla phi*h = 0
  std::mt19937_64 rng(3);
  const SpherePoint x = SpherePoint::normalized(gaussian(rng, 5));
  const SymmetricJet j = pullback_metric_jet(MapSpec::identity(4), x);
  CHECK((j.value - Mat::Identity(4, 4)).norm() < 1e-12);
  CHECK(j.nabla_norm2 < 1e-12);
  // tr nabla dphi is the tension
  const MapSpec poly = MapSpec::polynomial(2, 2, 3, 3);
  const SpherePoint y = SpherePoint::normalized(gaussian(rng, 4));
  const Vec t = vector_form_trace(poly, y, [](const MapJet& jet) { return jet.ambient_differential(); });
  CHECK((t - eval_jet(poly, y, 2).tension()).norm() < 1e-7);
}
