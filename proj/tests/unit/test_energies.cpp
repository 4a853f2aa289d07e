#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sphvar/energies.hpp"

using namespace sphvar;

namespace {
const double pi2 = kPi * kPi;
}

TEST_CASE("energy kinds parse and print") {
  CHECK(EnergyKind::parse("dirichlet").type == EnergyType::Dirichlet);
  CHECK(EnergyKind::parse("p:4").p == 4.0);
  CHECK(EnergyKind::parse("coupled-sigma2:0.5").kappa == 0.5);
  CHECK(EnergyKind::parse("coupled-symplectic:2").second == EnergyType::SymplecticDirichlet);
  for (const char* k : {"dirichlet", "sigma2", "symplectic", "p:3", "coupled-sigma2:1.5"}) {
    CHECK(EnergyKind::parse(k).name() == k);
  }
  CHECK_THROWS_AS(EnergyKind::parse("quartic"), InvalidArgument);
  CHECK_THROWS_AS(EnergyKind::parse("p:0.5"), InvalidArgument);
  CHECK_THROWS_AS(EnergyKind::parse("coupled-sigma2:-1"), InvalidArgument);
}

TEST_CASE("hopf energies") {
  const QuadratureGrid g = build_grid(3, 12);
  const MapSpec hopf = MapSpec::hopf();
  CHECK(total_energy(EnergyKind::dirichlet(), hopf, g).total == doctest::Approx(2 * pi2).epsilon(1e-12));
  CHECK(total_energy(EnergyKind::symplectic(), hopf, g).total == doctest::Approx(pi2).epsilon(1e-12));
  CHECK(total_energy(EnergyKind::sigma_two(), hopf, g).total == doctest::Approx(pi2).epsilon(1e-12));
  // (1/4) int |dphi|^4 = Vol(S^3)
  CHECK(total_energy(EnergyKind::p_energy(4), hopf, g).total == doctest::Approx(2 * pi2).epsilon(1e-12));
  CHECK_THROWS_AS(EnergyKind::p_energy(2), InvalidArgument);
  CHECK(total_energy(EnergyKind::coupled(EnergyType::SymplecticDirichlet, 2.0), hopf, g).total ==
        doctest::Approx(4 * pi2).epsilon(1e-12));
}

TEST_CASE("identity energies") {
  // E = m/2 Vol, sigma2 energy = C(m,2)/2 Vol
  CHECK(total_energy(EnergyKind::dirichlet(), MapSpec::identity(4), build_grid(4, 16)).total ==
        doctest::Approx(2.0 * 8 * pi2 / 3).epsilon(1e-10));
  CHECK(total_energy(EnergyKind::sigma_two(), MapSpec::identity(5), build_grid(5, 12)).total ==
        doctest::Approx(5.0 * pi2 * kPi).epsilon(1e-10));
  CHECK(total_energy(EnergyKind::dirichlet(), MapSpec::constant(3, 2), build_grid(3, 6)).total == 0.0);
}

TEST_CASE("suspension energies against a one-dimensional quadrature") {
  // reference values from a 30-digit radial integral of the conformal stretch
  const MapSpec s3 = MapSpec::suspension(3, 0.5);
  const QuadratureGrid g3 = build_grid(3, 24);
  CHECK(total_energy(EnergyKind::dirichlet(), s3, g3).total ==
        doctest::Approx(26.3189450695716229835586426663).epsilon(1e-10));
  CHECK(total_energy(EnergyKind::sigma_two(), s3, g3).total ==
        doctest::Approx(37.0110165040850948206293412495).epsilon(1e-10));
  const MapSpec s4 = MapSpec::suspension(4, 0.25);
  const QuadratureGrid g4 = build_grid(4, 32);
  CHECK(total_energy(EnergyKind::dirichlet(), s4, g4).total ==
        doctest::Approx(25.6539888464938729600332007307).epsilon(1e-9));
  CHECK(total_energy(EnergyKind::sigma_two(), s4, g4).total ==
        doctest::Approx(78.956835208714868950675927999).epsilon(1e-9));
}

TEST_CASE("symplectic energy needs a surface target") {
  CHECK_THROWS_AS(total_energy(EnergyKind::symplectic(), MapSpec::identity(3), build_grid(3, 6)), InvalidArgument);
  CHECK_THROWS_AS(total_energy(EnergyKind::dirichlet(), MapSpec::identity(3), build_grid(4, 6)), InvalidArgument);
}

TEST_CASE("energy report") {
  const QuadratureGrid g = build_grid(3, 6);
  const EnergyReport r = total_energy(EnergyKind::dirichlet(), MapSpec::hopf(), g);
  CHECK(r.min_density() == doctest::Approx(1.0));
  CHECK(r.max_density() == doctest::Approx(1.0));
  const auto j = r.to_json();
  CHECK(j["kind"] == "dirichlet");
  CHECK(j["map"] == "hopf");
  std::ostringstream csv;
  r.write_csv(g, csv);
  const std::string s = csv.str();
  CHECK(s.rfind("index,x_0,x_1,x_2,x_3,weight,density\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == static_cast<long>(g.size()) + 1);
}

TEST_CASE("E4 of conformal suspensions") {
  // at c = 1 the map is the identity: E4 = m^2/4 Vol(S^m)
  const SweepResult one = suspension_e4_sweep(5, {1.0}, 12);
  CHECK(one.rows[0].e4 == doctest::Approx(25.0 / 4 * pi2 * kPi).epsilon(1e-12));
  CHECK_THROWS_AS(suspension_e4_sweep(3, {1.0}, 12), InvalidArgument);
  const SweepResult s = suspension_e4_sweep(5, {1.0, 0.3, 0.1}, 8);
  CHECK(s.decreasing);
  CHECK(s.within_bound);
  for (const auto& row : s.rows) {
    CHECK(row.degree == 1);
    // the bound is attained for m = 5, up to the quadrature error of the coarse grid
    CHECK(std::abs(row.e4_normalized - row.bound) < 1e-6 * row.bound);
  }
  CHECK(suspension_e4_bound(5, 1.0) == doctest::Approx(8 * pi2 / 3 * kPi * 6 / 64).epsilon(1e-14));
}

TEST_CASE("polar count grows as the bubble concentrates") {
  CHECK(suspension_polar_count(5, 1.0, 12) >= 12);
  CHECK(suspension_polar_count(5, 0.05, 12) > suspension_polar_count(5, 0.5, 12));
}
