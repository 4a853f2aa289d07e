#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sphvar/maps.hpp"

namespace sphvar {

/// S(sigma)(X1, X2) = sigma(Ric X1, X2) + sigma(X1, Ric X2) + sum_s sigma(e_s, R(X1, X2) e_s)
/// on the round S^m, evaluated term by term in an orthonormal frame.
Mat curvature_operator_2form(const Mat& sigma);

/// Outcome of one integrated identity. `residual` is absolute; `scale` is the
/// quantity the tolerance is relative to.
struct IdentityReport {
  std::string identity;
  std::string map_id;
  std::string grid_id;
  double residual = 0.0;
  double scale = 0.0;
  double tolerance = 0.0;  // absolute, = relative tolerance * scale
  bool pass = false;
  std::map<std::string, double> terms;

  double relative() const { return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual); }
  nlohmann::json to_json() const;
};

/// int |d sigma|^2 + |delta sigma|^2 - |nabla sigma|^2 - (2m-4)|sigma|^2 for sigma = phi*Omega,
/// with tolerance 1e-3 int |phi*Omega|^2.
IdentityReport weitzenbock_residual(const MapSpec& map, const QuadratureGrid& grid);

struct RefinementStudy {
  std::string map_id;
  std::vector<int> resolutions;
  std::vector<double> residuals;  // |residual| / int |phi*Omega|^2
  double floor = 1e-8;            // finite-difference noise level
  /// Each refinement halves the residual at least, or reaches the floor.
  bool converged() const;
  void write_csv(std::ostream& out) const;
};

RefinementStudy weitzenbock_refinement(const MapSpec& map, const std::vector<int>& resolutions);

/// sup over nodes of |d(phi*Omega)|.
double closedness_sup(const MapSpec& map, const QuadratureGrid& grid);

/// |(nabla_X phi*h)(Y, Z) - h(nabla dphi(X, Y), dphi Z) - h(dphi Y, nabla dphi(X, Z))|
/// with the left side by chart differences and the right side from the 2-jet.
double magic_lemma_residual(const MapSpec& map, const SpherePoint& x, const Vec& X, const Vec& Y, const Vec& Z);

/// Integrated Weitzenboeck formula for phi*h:
/// int 1/2|nabla phi*h|^2 + sum_i l_i^2 |nabla dphi(e_i, .)|^2
///   + sum_i l_i^2 [(m-1) l_i^2 - Ric^phi(dphi e_i, dphi e_i)] - h(tau, tr nabla(dphi o C)) = 0,
/// tolerance 1e-3 of the largest integrated term.
IdentityReport nakauchi_weitzenbock_residual(const MapSpec& map, const QuadratureGrid& grid);

struct InequalityReport {
  std::string map_id;
  std::size_t nodes = 0;
  bool has_i = false;            // (i) needs a surface target
  // Violations and equality tests are relative to max(1, |dphi|^4).
  double max_violation_i = 0.0;  // max(|phi*Omega|^2 - sigma2, 0)
  double max_violation_ii = 0.0; // max(sigma2 - (n-1)/(2n)|dphi|^4, 0)
  double max_gap_i = 0.0;        // largest slack in (i)
  double max_gap_ii = 0.0;
  bool equality_i = false;       // slack below tolerance at every node
  bool equality_ii = false;
  double strict_fraction_ii = 0.0;
  double tolerance = 1e-10;

  bool pass() const { return max_violation_i <= tolerance && max_violation_ii <= tolerance; }
  nlohmann::json to_json() const;
};

InequalityReport inequality_check(const MapSpec& map, const QuadratureGrid& grid);
std::vector<InequalityReport> inequality_suite(const std::vector<MapSpec>& maps, int res);

}  // namespace sphvar
