#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sphvar/maps.hpp"

namespace sphvar {

enum class EnergyType { Dirichlet, PEnergy, SigmaTwo, SymplecticDirichlet, Coupled };

/// Functional selector. For Coupled the base is always Dirichlet and `second`
/// is SigmaTwo or SymplecticDirichlet.
struct EnergyKind {
  EnergyType type = EnergyType::Dirichlet;
  double p = 0.0;
  EnergyType second = EnergyType::SigmaTwo;
  double kappa = 0.0;

  static EnergyKind dirichlet() { return {}; }
  static EnergyKind p_energy(double p);
  static EnergyKind sigma_two() { return {EnergyType::SigmaTwo}; }
  static EnergyKind symplectic() { return {EnergyType::SymplecticDirichlet}; }
  static EnergyKind coupled(EnergyType second, double kappa);

  /// Accepts dirichlet, p:P, sigma2, symplectic, coupled-sigma2:K and
  /// coupled-symplectic:K.
  static EnergyKind parse(std::string_view name);
  std::string name() const;

  bool needs_omega() const;
  /// The quartic part of a coupled kind, as a standalone kind.
  EnergyKind second_kind() const;
};

double energy_density(const EnergyKind& kind, const PullbackPointData& data);

struct EnergyReport {
  EnergyKind kind;
  std::string map_id;
  std::string grid_id;
  int dim = 0;
  std::vector<int> resolution;
  double total = 0.0;
  std::vector<double> densities;

  double min_density() const;
  double max_density() const;
  nlohmann::json to_json() const;
  /// Per-node CSV: index,x_0..x_m,weight,density.
  void write_csv(const QuadratureGrid& grid, std::ostream& out) const;
};

EnergyReport total_energy(const EnergyKind& kind, const MapSpec& map, const QuadratureGrid& grid);

struct SweepRow {
  double c = 0.0;
  double e4 = 0.0;             // (1/4) int |dphi|^4
  double e4_normalized = 0.0;  // e4 / m^2
  double bound = 0.0;          // Vol(S^{m-1}) pi c (c^2+4c+1) / (4 (c+1)^4)
  long degree = 0;
  std::string grid_id;
};

struct SweepResult {
  int m = 0;
  std::vector<SweepRow> rows;
  bool decreasing = false;  // strictly, in sweep order
  bool within_bound = false;
  nlohmann::json to_json() const;
};

double suspension_e4_bound(int m, double c);

/// Smallest count >= res (grown geometrically) at which the Gauss-Legendre
/// rule for the radial E_4 profile of phi_c has converged to ~1e-13.
int suspension_polar_count(int m, double c, int res);

/// E_4 of the conformal suspensions phi_c. The first polar angle uses
/// suspension_polar_count() nodes, since phi_c concentrates near the south
/// pole as c -> 0; the other angles use res.
SweepResult suspension_e4_sweep(int m, const std::vector<double>& cs, int res);

}  // namespace sphvar
