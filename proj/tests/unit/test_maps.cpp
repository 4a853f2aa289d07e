#include <cmath>
#include <random>

#include "doctest.h"
#include "sphvar/maps.hpp"

using namespace sphvar;

namespace {

SpherePoint random_point(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> N;
  Vec v(m + 1);
  for (int i = 0; i <= m; ++i) v(i) = N(rng);
  return SpherePoint::normalized(v);
}

}  // namespace

TEST_CASE("map registry") {
  CHECK(MapSpec::parse("hopf").id() == "hopf");
  CHECK(MapSpec::parse("identity:4").domain_dim() == 4);
  CHECK(MapSpec::parse("poly:7:2:3:2").target().n == 2);
  CHECK(MapSpec::parse("compose(hopf,rotate:3:2)").domain_dim() == 3);
  CHECK(MapSpec::hopf().target().radius == 0.5);
  CHECK(MapSpec::identity(3).target().radius == 1.0);
  CHECK_THROWS_AS(MapSpec::parse("hopf:3"), InvalidArgument);
  CHECK_THROWS_AS(MapSpec::parse("identity:1"), InvalidArgument);
  CHECK_THROWS_AS(MapSpec::parse("suspension:3:-1"), InvalidArgument);
  CHECK_THROWS_AS(MapSpec::parse("poly:1:9:3:2"), InvalidArgument);
  CHECK_THROWS_AS(MapSpec::parse("compose(identity:4,hopf)"), InvalidArgument);
  CHECK_THROWS_AS(MapSpec::parse("nonsense"), InvalidArgument);
}

TEST_CASE("maps land on their target sphere") {
  std::mt19937_64 rng(1);
  for (const char* id : {"hopf", "suspension:4:0.3", "poly:5:3:3:3", "compose(hopf,rotate:3:4)", "reflect:5"}) {
    const MapSpec map = MapSpec::parse(id);
    for (int k = 0; k < 10; ++k) {
      const Vec y = map.value(random_point(rng, map.domain_dim()).coords());
      CHECK(std::abs(y.norm() - map.target().radius) < 1e-13);
    }
  }
}

TEST_CASE("analytic jets agree with chart differences") {
  std::mt19937_64 rng(2);
  for (const char* id : {"hopf", "suspension:3:0.5", "poly:3:2:3:2", "poly:4:3:4:3", "compose(hopf,rotate:3:1)"}) {
    const MapSpec map = MapSpec::parse(id);
    for (int k = 0; k < 5; ++k) {
      const SpherePoint x = random_point(rng, map.domain_dim());
      const MapJet a = eval_jet(map, x, 2);
      const MapJet f = eval_jet_fd(map, x);
      CAPTURE(id);
      CHECK((a.dphi - f.dphi).norm() < 1e-8 * (1.0 + a.dphi.norm()));
      CHECK((a.second - f.second).norm() < 1e-5 * (1.0 + a.second.norm()));
      CHECK((a.tension() - tension_field(map.with_mode(JetMode::FiniteDifference), x)).norm() <
            1e-5 * (1.0 + a.second.norm()));
    }
  }
}

TEST_CASE("hopf map pulls back a rank-2 isotropic metric") {
  std::mt19937_64 rng(3);
  const MapSpec hopf = MapSpec::hopf();
  for (int k = 0; k < 20; ++k) {
    const MapJet jet = eval_jet(hopf, random_point(rng, 3), 2);
    const PullbackPointData d = pullback_data(jet);
    CHECK(std::abs(d.eigenvalues(0)) < 1e-13);
    CHECK(std::abs(d.eigenvalues(1) - 1.0) < 1e-13);
    CHECK(std::abs(d.eigenvalues(2) - 1.0) < 1e-13);
    CHECK(std::abs(d.energy_density - 2.0) < 1e-13);
    CHECK(std::abs(d.sigma2 - 1.0) < 1e-13);
    CHECK(std::abs(d.omega_norm2 - 1.0) < 1e-13);
    CHECK(d.rank == 2);
    CHECK(jet.tension().norm() < 1e-12);  // harmonic
  }
}

TEST_CASE("identity is totally geodesic") {
  std::mt19937_64 rng(4);
  const MapJet jet = eval_jet(MapSpec::identity(4), random_point(rng, 4), 2);
  CHECK(jet.second.norm() < 1e-13);
  const PullbackPointData d = pullback_data(jet);
  CHECK(std::abs(d.energy_density - 4.0) < 1e-13);
  CHECK(std::abs(d.sigma2 - 6.0) < 1e-13);
}

TEST_CASE("suspensions are conformal with the closed-form stretch") {
  std::mt19937_64 rng(5);
  const double c = 0.3;
  const MapSpec map = MapSpec::suspension(4, c);
  for (int k = 0; k < 10; ++k) {
    const SpherePoint x = random_point(rng, 4);
    const PullbackPointData d = pullback_data(eval_jet(map, x, 1));
    // the polar angle is measured from the north pole x_0 = 1
    const double s = std::acos(std::clamp(x.coords()(0), -1.0, 1.0));
    const double l = suspension_stretch(c, s);
    CHECK((d.metric - l * l * Mat::Identity(4, 4)).norm() < 1e-12);
  }
  CHECK(suspension_stretch(1.0, 0.7) == doctest::Approx(1.0));
  // c (1 + tan^2(s/2)) / (1 + c^2 tan^2(s/2))
  const double t2 = std::pow(std::tan(0.4), 2);
  CHECK(suspension_stretch(0.2, 0.8) == doctest::Approx(0.2 * (1 + t2) / (1 + 0.04 * t2)).epsilon(1e-14));
}

TEST_CASE("topological degree") {
  CHECK(topological_degree(MapSpec::identity(3), build_grid(3, 8)).degree == 1);
  CHECK(topological_degree(MapSpec::reflection(3), build_grid(3, 8)).degree == -1);
  CHECK(topological_degree(MapSpec::rotation(4, 9), build_grid(4, 8)).degree == 1);
  CHECK(topological_degree(MapSpec::suspension(5, 0.25), build_grid(5, 8)).degree == 1);
  CHECK(topological_degree(MapSpec::constant(3, 3), build_grid(3, 8)).degree == 0);
  CHECK_THROWS_AS(topological_degree(MapSpec::hopf(), build_grid(3, 8)), InvalidArgument);
}

TEST_CASE("isotropy") {
  const IsotropyResult h = isotropy_check(MapSpec::hopf(), build_grid(3, 6));
  CHECK_FALSE(h.isotropic);
  CHECK(h.max_norm == doctest::Approx(1.0));
  CHECK(isotropy_check(MapSpec::constant(3, 2), build_grid(3, 6)).isotropic);
  CHECK_THROWS_AS(isotropy_check(MapSpec::identity(3), build_grid(3, 6)), InvalidArgument);
}

TEST_CASE("random polynomial maps are non-degenerate") {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const MapSpec map = MapSpec::polynomial(s, 2, 3, 2);
    std::mt19937_64 rng(s);
    double mean = 0.0;
    for (int k = 0; k < 50; ++k) mean += pullback_data(eval_jet(map, random_point(rng, 3), 1)).energy_density / 50;
    CHECK(mean > 0.01);
  }
}

TEST_CASE("reframing rotates the differential") {
  std::mt19937_64 rng(6);
  const MapJet jet = eval_jet(MapSpec::hopf(), random_point(rng, 3), 2);
  const Mat R = Eigen::HouseholderQR<Mat>(Mat::Random(3, 3)).householderQ();
  const MapJet r = reframe(jet, R);
  CHECK((r.dphi - jet.dphi * R).norm() < 1e-13);
  CHECK((r.tension() - jet.tension()).norm() < 1e-12);
  CHECK(std::abs(pullback_data(r).sigma2 - pullback_data(jet).sigma2) < 1e-13);
}
