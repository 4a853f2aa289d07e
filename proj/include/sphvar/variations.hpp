#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sphvar/energies.hpp"
#include "sphvar/maps.hpp"

namespace sphvar {

/// A variation field v in Gamma(phi^{-1}TN) at one point, with its
/// derivatives along the jet frame.
struct VariationSample {
  Vec v;
  Mat cov;      // (n+1) x m, column i = nabla^phi_{e_i} v
  Mat ambient;  // (n+1) x m, column i = d_{e_i} v in R^{n+1}
};

enum class FieldFamily { Pushforward, Pullback, Custom };

class VariationField {
 public:
  virtual ~VariationField() = default;
  virtual VariationSample sample(const MapJet& jet) const = 0;
  /// Order of the map jet that sample() needs.
  virtual int jet_order() const { return 1; }
  virtual std::string tag() const = 0;
};

using FieldPtr = std::shared_ptr<const VariationField>;

/// v_alpha = dphi(grad f_alpha); alpha is 1-based.
FieldPtr pushforward_field(int alpha);
/// v_alpha = (grad f_alpha) o phi, the target gradient of y -> <a_alpha, y>.
FieldPtr pullback_field(int alpha);
/// v = P_y W(x) for a seeded quadratic polynomial W: R^{m+1} -> R^{n+1}.
FieldPtr custom_field(std::uint64_t seed, int m, int n);
FieldPtr scaled_field(FieldPtr v, double s);
/// u + s v.
FieldPtr sum_field(FieldPtr u, FieldPtr v, double s = 1.0);
FieldPtr zero_field();

/// The family for a map S^m -> S^n(r): m+1 pushforward fields or n+1
/// pullback fields.
std::vector<FieldPtr> field_family(FieldFamily family, const MapSpec& map);
FieldFamily parse_family(std::string_view name);
std::string family_name(FieldFamily family);

/// Samples of a field on a grid, checked for tangency.
struct VariationSamples {
  std::string map_id;
  std::string tag;
  std::vector<Vec> values;
};
VariationSamples sample_field(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid);

// -- first variation --------------------------------------------------------

/// Euler-Lagrange operator: per-node residual and its sup norm. Residuals are
/// tau (Dirichlet), dphi(Z) with Z = (delta phi*Omega)^sharp (symplectic),
/// tr nabla(|dphi|^2 dphi - dphi o C) (sigma2), tau - kappa J dphi(Z) and
/// tau + kappa tr nabla(...) (coupled).
struct ELResidual {
  EnergyKind kind;
  std::string map_id;
  std::string grid_id;
  std::vector<Vec> residual;
  double sup = 0.0;
  nlohmann::json to_json() const;
};

ELResidual el_residual(const EnergyKind& kind, const MapSpec& map, const QuadratureGrid& grid);

/// G with dE(phi)[v] = -int h(G, v).
Vec energy_gradient(const EnergyKind& kind, const MapSpec& map, const SpherePoint& x);

/// -int h(G, v).
double first_variation(const EnergyKind& kind, const MapSpec& map, const VariationField& v,
                       const QuadratureGrid& grid);
/// [E(phi_t) - E(phi_-t)] / 2t along the geodesic variation, Richardson-combined.
double first_variation_fd(const EnergyKind& kind, const MapSpec& map, const VariationField& v,
                          const QuadratureGrid& grid);

/// sup over nodes of |delta phi*Omega|.
double codifferential_sup(const MapSpec& map, const QuadratureGrid& grid);

// -- geodesic variations ----------------------------------------------------

struct DeformedJet {
  Vec value;
  Mat dphi;
};

/// phi_t(x) = exp_{phi(x)}(t v(x)) and its differential.
DeformedJet deform(const MapJet& jet, const VariationSample& s, double t);

/// phi_t at every grid node. Throws when |t| max|v| / r >= pi/4.
std::vector<Vec> geodesic_deform(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid, double t);

// -- second variation -------------------------------------------------------

enum class HessianMethod { FiniteDifference, Formula };

struct HessianResult {
  EnergyKind kind;
  std::string map_id;
  std::string variation;
  HessianMethod method = HessianMethod::Formula;
  double value = 0.0;
  double step = 0.0;         // fd only: coarse step, paired with step/2
  bool critical = true;      // map passed the criticality gate
  double el_sup = 0.0;
  nlohmann::json to_json() const;
};

struct HessianOptions {
  /// Run el_residual first and compare with kCriticalityGate.
  bool verify_critical = true;
};

inline constexpr double kCriticalityGate = 1e-4;

/// Second difference of E along phi_t, per node, at t = 1e-2 and 5e-3.
/// Non-critical maps are flagged, not rejected.
HessianResult hessian_fd(const EnergyKind& kind, const MapSpec& map, const VariationField& v,
                         const QuadratureGrid& grid, const HessianOptions& opts = {});

/// int |nabla v|^2 - Ric^phi(v, v).
HessianResult hessian_formula_E(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid,
                                const HessianOptions& opts = {});
/// int |d(phi* i_v Omega)|^2 + Omega(v, nabla_Z v).
HessianResult hessian_formula_F(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid,
                                const HessianOptions& opts = {});
/// Second variation of the sigma_2-energy in the eigenframe of phi*h.
HessianResult hessian_formula_sigma2(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid,
                                     const HessianOptions& opts = {});
/// Dispatch on kind; coupled kinds add kappa times the quartic formula.
HessianResult hessian_formula(const EnergyKind& kind, const MapSpec& map, const VariationField& v,
                              const QuadratureGrid& grid, const HessianOptions& opts = {});

struct TraceResult {
  EnergyKind kind;
  std::string map_id;
  std::string family;
  std::vector<double> per_alpha;     // formula method
  std::vector<double> per_alpha_fd;  // empty unless requested
  double trace = 0.0;
  double trace_fd = 0.0;
  std::optional<double> predicted;   // closed-form averaged expression
  std::optional<double> coefficient; // 2(4-m) or (2-m); absent for coupled kinds
  double integrand = 0.0;            // integral the coefficient multiplies
  double scale = 0.0;                // error normalization for ratio_error
  bool critical = true;
  double el_sup = 0.0;

  /// trace / integrand; absent for coupled kinds.
  std::optional<double> ratio() const;
  /// |trace - predicted| / scale, where scale is |coefficient| * integrand,
  /// or integrand when the coefficient vanishes, or |(2-m) int|dphi|^2| for
  /// coupled kinds.
  std::optional<double> ratio_error() const;
  nlohmann::json to_json() const;
};

TraceResult averaged_hessian_trace(const EnergyKind& kind, const MapSpec& map, FieldFamily family,
                                   const QuadratureGrid& grid, bool with_fd = false);

/// Closed form of the averaged trace: (2-m) int|dphi|^2, 2(4-m) int|phi*Omega|^2,
/// 2(4-m) int sigma2, and their kappa-combinations for coupled kinds. Only the
/// pushforward family has one.
std::optional<double> predicted_trace(const EnergyKind& kind, const MapSpec& map, FieldFamily family,
                                      const QuadratureGrid& grid);

struct ThresholdResult {
  std::string map_id;
  EnergyType second = EnergyType::SymplecticDirichlet;
  double dirichlet_integral = 0.0;  // int |dphi|^2
  double second_integral = 0.0;     // int |phi*Omega|^2 or int sigma2
  double kappa_star = 0.0;          // +inf when second_integral <= 1e-12
  bool infinite = false;
  nlohmann::json to_json() const;
};

ThresholdResult stability_threshold(const MapSpec& map, EnergyType second, const QuadratureGrid& grid);

/// Smooth test function on the domain; a missing gradient is taken by chart
/// finite differences.
struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::string name;

  static ScalarField constant(double c);
  static ScalarField coordinate(int alpha);
};

/// int (n-1)(|grad f|^2 |dphi|^2 - |dphi(grad f)|^2) + 2(4-n) f^2 sigma2.
double stability_inequality_lhs(const MapSpec& map, const ScalarField& f, const QuadratureGrid& grid);

}  // namespace sphvar
