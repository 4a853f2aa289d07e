#include <cmath>

#include "doctest.h"
#include "sphvar/variations.hpp"

using namespace sphvar;

namespace {
const double pi2 = kPi * kPi;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }
}  // namespace

TEST_CASE("hopf and identity are critical") {
  const QuadratureGrid g3 = build_grid(3, 8);
  CHECK(el_residual(EnergyKind::dirichlet(), MapSpec::hopf(), g3).sup < 1e-10);
  CHECK(el_residual(EnergyKind::symplectic(), MapSpec::hopf(), g3).sup < 1e-8);
  CHECK(el_residual(EnergyKind::sigma_two(), MapSpec::identity(3), g3).sup < 1e-8);
  CHECK(el_residual(EnergyKind::coupled(EnergyType::SymplecticDirichlet, 1.0), MapSpec::hopf(), g3).sup < 1e-8);
  CHECK(el_residual(EnergyKind::dirichlet(), MapSpec::polynomial(1, 2, 3, 3), g3).sup > 1e-2);
}

TEST_CASE("the pullback of the area form is not coclosed for hopf") {
  // phi*Omega is proportional to d(eta) for the contact form eta, and d eta is
  // not coclosed; only dphi applied to its dual vanishes.
  const QuadratureGrid g = build_grid(3, 8);
  CHECK(codifferential_sup(MapSpec::hopf(), g) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("first variation matches finite differences") {
  const QuadratureGrid g = build_grid(3, 20);
  const MapSpec map = MapSpec::polynomial(2, 2, 3, 2);
  const FieldPtr v = custom_field(11, 3, 2);
  for (const EnergyKind& k : {EnergyKind::dirichlet(), EnergyKind::symplectic(), EnergyKind::sigma_two(),
                              EnergyKind::coupled(EnergyType::SigmaTwo, 0.7)}) {
    CAPTURE(k.name());
    const double a = first_variation(k, map, *v, g);
    const double b = first_variation_fd(k, map, *v, g);
    CHECK(std::abs(a - b) < 1e-5 * (1.0 + std::abs(b)));
  }
}

TEST_CASE("fields are tangent to the target") {
  const MapSpec hopf = MapSpec::hopf();
  const QuadratureGrid g = build_grid(3, 6);
  for (const auto& fam : {FieldFamily::Pushforward, FieldFamily::Pullback}) {
    for (const auto& v : field_family(fam, hopf)) CHECK_NOTHROW(sample_field(hopf, *v, g));
  }
  CHECK(field_family(FieldFamily::Pushforward, hopf).size() == 4);
  CHECK(field_family(FieldFamily::Pullback, hopf).size() == 3);
  CHECK_THROWS_AS(parse_family("sideways"), InvalidArgument);
}

TEST_CASE("geodesic deformation") {
  const MapSpec hopf = MapSpec::hopf();
  const QuadratureGrid g = build_grid(3, 6);
  const FieldPtr v = pullback_field(1);
  const auto moved = geodesic_deform(hopf, *v, g, 0.05);
  for (const auto& y : moved) CHECK(std::abs(y.norm() - 0.5) < 1e-13);
  CHECK_THROWS_AS(geodesic_deform(hopf, *v, g, 5.0), InvalidArgument);
}

TEST_CASE("hessian formulas agree with second differences") {
  const QuadratureGrid g = build_grid(3, 20);
  const FieldPtr v = custom_field(5, 3, 2);
  const FieldPtr w = custom_field(6, 3, 3);
  CHECK(rel(hessian_formula_E(MapSpec::hopf(), *v, g).value, hessian_fd(EnergyKind::dirichlet(), MapSpec::hopf(), *v, g).value) < 1e-5);
  CHECK(rel(hessian_formula_F(MapSpec::hopf(), *v, g).value, hessian_fd(EnergyKind::symplectic(), MapSpec::hopf(), *v, g).value) < 1e-5);
  CHECK(rel(hessian_formula_sigma2(MapSpec::identity(3), *w, g).value,
            hessian_fd(EnergyKind::sigma_two(), MapSpec::identity(3), *w, g).value) < 1e-5);
  const EnergyKind coupled = EnergyKind::coupled(EnergyType::SymplecticDirichlet, 0.8);
  CHECK(rel(hessian_formula(coupled, MapSpec::hopf(), *v, g).value, hessian_fd(coupled, MapSpec::hopf(), *v, g).value) <
        1e-5);
}

TEST_CASE("hessians are quadratic in the field") {
  const QuadratureGrid g = build_grid(3, 8);
  const FieldPtr v = custom_field(7, 3, 2);
  const double h1 = hessian_formula_F(MapSpec::hopf(), *v, g).value;
  const double h3 = hessian_formula_F(MapSpec::hopf(), *scaled_field(v, 3.0), g).value;
  CHECK(h3 == doctest::Approx(9.0 * h1).epsilon(1e-10));
  CHECK(std::abs(hessian_formula_F(MapSpec::hopf(), *zero_field(), g).value) < 1e-14);
  // polarization: H(u+v) + H(u-v) = 2H(u) + 2H(v)
  const FieldPtr u = custom_field(8, 3, 2);
  auto H = [&](const FieldPtr& f) { return hessian_formula_E(MapSpec::hopf(), *f, g).value; };
  CHECK(H(sum_field(u, v)) + H(sum_field(u, v, -1.0)) == doctest::Approx(2 * H(u) + 2 * H(v)).epsilon(1e-10));
}

TEST_CASE("formula hessians refuse non-critical maps") {
  const QuadratureGrid g = build_grid(3, 6);
  const MapSpec poly = MapSpec::polynomial(3, 2, 3, 3);
  const FieldPtr v = custom_field(1, 3, 3);
  CHECK_THROWS_AS(hessian_formula_E(poly, *v, g), InvalidArgument);
  const HessianResult fd = hessian_fd(EnergyKind::dirichlet(), poly, *v, g);
  CHECK_FALSE(fd.critical);
}

TEST_CASE("averaged hessian traces") {
  const QuadratureGrid g3 = build_grid(3, 12);
  // Hopf, symplectic: 2(4-m) int |phi*Omega|^2 = 4 pi^2
  const TraceResult f = averaged_hessian_trace(EnergyKind::symplectic(), MapSpec::hopf(), FieldFamily::Pushforward, g3);
  CHECK(f.trace == doctest::Approx(4 * pi2).epsilon(1e-8));
  CHECK(*f.coefficient == 2.0);
  CHECK(*f.ratio_error() < 1e-8);
  // Hopf, Dirichlet: (2-m) int |dphi|^2 = -4 pi^2
  const TraceResult e = averaged_hessian_trace(EnergyKind::dirichlet(), MapSpec::hopf(), FieldFamily::Pushforward, g3);
  CHECK(e.trace == doctest::Approx(-4 * pi2).epsilon(1e-8));
  // identity, sigma2: 2(4-m) C(m,2) Vol
  const TraceResult s3 =
      averaged_hessian_trace(EnergyKind::sigma_two(), MapSpec::identity(3), FieldFamily::Pushforward, g3);
  CHECK(s3.trace == doctest::Approx(2 * 3 * 2 * pi2).epsilon(1e-8));
  CHECK(*s3.ratio() == doctest::Approx(2.0).epsilon(1e-8));
  const TraceResult s4 = averaged_hessian_trace(EnergyKind::sigma_two(), MapSpec::identity(4), FieldFamily::Pushforward,
                                                build_grid(4, 8));
  CHECK(std::abs(s4.trace) < 1e-8);
  // coupled at kappa = 1 cancels and has no ratio
  const TraceResult c = averaged_hessian_trace(EnergyKind::coupled(EnergyType::SymplecticDirichlet, 1.0),
                                               MapSpec::hopf(), FieldFamily::Pushforward, g3);
  CHECK(std::abs(c.trace) < 1e-8);
  CHECK_FALSE(c.ratio().has_value());
  CHECK_FALSE(predicted_trace(EnergyKind::symplectic(), MapSpec::hopf(), FieldFamily::Pullback, g3).has_value());
}

TEST_CASE("stability thresholds") {
  const QuadratureGrid g = build_grid(3, 12);
  CHECK(stability_threshold(MapSpec::hopf(), EnergyType::SymplecticDirichlet, g).kappa_star ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stability_threshold(MapSpec::identity(3), EnergyType::SigmaTwo, g).kappa_star ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(stability_threshold(MapSpec::hopf(), EnergyType::SigmaTwo, g).kappa_star ==
        doctest::Approx(1.0).epsilon(1e-12));
  const ThresholdResult inf = stability_threshold(MapSpec::constant(3, 2), EnergyType::SymplecticDirichlet, g);
  CHECK(inf.infinite);
  CHECK(inf.to_json()["kappa_star"] == "inf");
  CHECK_THROWS_AS(stability_threshold(MapSpec::identity(4), EnergyType::SigmaTwo, build_grid(4, 6)), InvalidArgument);
}

TEST_CASE("stability inequality for the identity") {
  const QuadratureGrid g = build_grid(3, 12);
  // f = x_1: (n-1)(|grad f|^2 m - |grad f|^2) + 2(4-n) f^2 C(3,2) integrates to 9 pi^2
  CHECK(stability_inequality_lhs(MapSpec::identity(3), ScalarField::coordinate(1), g) ==
        doctest::Approx(9 * pi2).epsilon(1e-10));
  ScalarField nograd = ScalarField::coordinate(2);
  nograd.grad = nullptr;
  CHECK(stability_inequality_lhs(MapSpec::identity(3), nograd, g) == doctest::Approx(9 * pi2).epsilon(1e-7));
  // constants only see the sigma2 term: 2 * 3 * Vol
  CHECK(stability_inequality_lhs(MapSpec::identity(3), ScalarField::constant(1.0), g) ==
        doctest::Approx(12 * pi2).epsilon(1e-10));
}
