#include "sphvar/energies.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sphvar/reduce.hpp"

namespace sphvar {

EnergyKind EnergyKind::p_energy(double p) {
  if (!(p > 2.0) || !std::isfinite(p)) throw InvalidArgument("p-energy needs p > 2");
  EnergyKind k;
  k.type = EnergyType::PEnergy;
  k.p = p;
  return k;
}

EnergyKind EnergyKind::coupled(EnergyType second, double kappa) {
  if (second != EnergyType::SigmaTwo && second != EnergyType::SymplecticDirichlet) {
    throw InvalidArgument("coupled energy needs sigma2 or symplectic as its quartic part");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("coupling constant kappa must be > 0");
  EnergyKind k;
  k.type = EnergyType::Coupled;
  k.second = second;
  k.kappa = kappa;
  return k;
}

namespace {

double parse_number(std::string_view s, std::string_view what) {
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size()) {
    throw InvalidArgument("invalid " + std::string(what) + " '" + str + "'");
  }
  return v;
}

std::string format_number(double v) {
  for (int p = 1; p <= 17; ++p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return std::to_string(v);
}

}  // namespace

EnergyKind EnergyKind::parse(std::string_view name) {
  if (name == "dirichlet") return dirichlet();
  if (name == "sigma2") return sigma_two();
  if (name == "symplectic") return symplectic();
  if (name.starts_with("p:")) return p_energy(parse_number(name.substr(2), "p-energy exponent"));
  if (name.starts_with("coupled-sigma2:")) {
    return coupled(EnergyType::SigmaTwo, parse_number(name.substr(15), "coupling constant"));
  }
  if (name.starts_with("coupled-symplectic:")) {
    return coupled(EnergyType::SymplecticDirichlet, parse_number(name.substr(19), "coupling constant"));
  }
  throw InvalidArgument("unknown energy kind '" + std::string(name) +
                        "' (expected dirichlet, p:P, sigma2, symplectic, coupled-sigma2:K, coupled-symplectic:K)");
}

std::string EnergyKind::name() const {
  switch (type) {
    case EnergyType::Dirichlet: return "dirichlet";
    case EnergyType::PEnergy: return "p:" + format_number(p);
    case EnergyType::SigmaTwo: return "sigma2";
    case EnergyType::SymplecticDirichlet: return "symplectic";
    case EnergyType::Coupled:
      return std::string(second == EnergyType::SigmaTwo ? "coupled-sigma2:" : "coupled-symplectic:") +
             format_number(kappa);
  }
  return "?";
}

bool EnergyKind::needs_omega() const {
  return type == EnergyType::SymplecticDirichlet ||
         (type == EnergyType::Coupled && second == EnergyType::SymplecticDirichlet);
}

EnergyKind EnergyKind::second_kind() const {
  if (type != EnergyType::Coupled) throw InvalidArgument("only coupled kinds have a quartic part");
  return second == EnergyType::SigmaTwo ? sigma_two() : symplectic();
}

double energy_density(const EnergyKind& kind, const PullbackPointData& d) {
  switch (kind.type) {
    case EnergyType::Dirichlet: return 0.5 * d.energy_density;
    case EnergyType::PEnergy: return std::pow(d.energy_density, 0.5 * kind.p) / kind.p;
    case EnergyType::SigmaTwo: return 0.5 * d.sigma2;
    case EnergyType::SymplecticDirichlet:
      if (!d.has_omega) throw InvalidArgument("symplectic energy needs a surface target");
      return 0.5 * d.omega_norm2;
    case EnergyType::Coupled:
      return 0.5 * d.energy_density + kind.kappa * energy_density(kind.second_kind(), d);
  }
  return 0.0;
}

double EnergyReport::min_density() const {
  return densities.empty() ? 0.0 : *std::min_element(densities.begin(), densities.end());
}

double EnergyReport::max_density() const {
  return densities.empty() ? 0.0 : *std::max_element(densities.begin(), densities.end());
}

nlohmann::json EnergyReport::to_json() const {
  return {{"kind", kind.name()},
          {"map", map_id},
          {"grid", {{"dim", dim}, {"res", resolution}}},
          {"total", total},
          {"min_density", min_density()},
          {"max_density", max_density()}};
}

void EnergyReport::write_csv(const QuadratureGrid& grid, std::ostream& out) const {
  out << "index";
  for (int k = 0; k <= grid.dim(); ++k) out << ",x_" << k;
  out << ",weight,density\n";
  char buf[40];
  for (std::size_t i = 0; i < densities.size(); ++i) {
    out << i;
    const Vec x = grid.node(i);
    for (int k = 0; k <= grid.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", x(k));
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", grid.weight(i));
    out << ',' << buf;
    std::snprintf(buf, sizeof buf, "%.17g", densities[i]);
    out << ',' << buf << '\n';
  }
}

EnergyReport total_energy(const EnergyKind& kind, const MapSpec& map, const QuadratureGrid& grid) {
  if (grid.dim() != map.domain_dim()) {
    throw InvalidArgument("grid is on S^" + std::to_string(grid.dim()) + " but " + map.id() + " is defined on S^" +
                          std::to_string(map.domain_dim()));
  }
  if (kind.needs_omega() && !map.target().is_surface()) {
    throw InvalidArgument("energy kind " + kind.name() + " needs a surface target; " + map.id() + " maps into S^" +
                          std::to_string(map.target().n));
  }
  EnergyReport r;
  r.kind = kind;
  r.map_id = map.id();
  r.grid_id = grid.id();
  r.dim = grid.dim();
  r.resolution = grid.resolution();
  r.densities = sample_density(grid, [&](std::size_t, const Vec& x) {
    return energy_density(kind, pullback_data(eval_jet(map, SpherePoint::normalized(x), 1)));
  });
  r.total = integrate(grid, r.densities);
  return r;
}

double suspension_e4_bound(int m, double c) {
  return sphere_volume(m - 1) * kPi * c * (c * c + 4.0 * c + 1.0) / (4.0 * std::pow(c + 1.0, 4));
}

int suspension_polar_count(int m, double c, int res) {
  // The E_4 density of phi_c depends on the first polar angle only, so the
  // polar rule can be converged in one dimension.
  auto profile = [&](int n) {
    std::vector<double> t, w;
    gauss_legendre(n, t, w);
    CompensatedSum acc;
    for (int i = 0; i < n; ++i) {
      const double s = 0.5 * kPi * (t[i] + 1.0);
      const double l = suspension_stretch(c, s);
      acc.add(w[i] * l * l * l * l * std::pow(std::sin(s), m - 1));
    }
    return 0.5 * kPi * acc.value();
  };
  int n = std::max(res, 4);
  double prev = profile(n);
  for (int iter = 0; iter < 40; ++iter) {
    const int next = n + std::max(4, n / 2);
    const double cur = profile(next);
    if (std::abs(cur - prev) <= 1e-13 * std::abs(cur)) return n;
    n = next;
    prev = cur;
  }
  throw NumericalError("polar rule for suspension c = " + std::to_string(c) + " did not converge");
}

SweepResult suspension_e4_sweep(int m, const std::vector<double>& cs, int res) {
  if (m < 5) throw InvalidArgument("the E_4 infimum sweep needs m >= 5");
  if (cs.empty()) throw InvalidArgument("the E_4 sweep needs at least one value of c");
  SweepResult out;
  out.m = m;
  for (double c : cs) {
    if (!(c > 0.0)) throw InvalidArgument("suspension dilation c must be > 0");
    const MapSpec map = MapSpec::suspension(m, c);
    std::vector<int> counts(m, res);
    counts[0] = suspension_polar_count(m, c, res);
    const QuadratureGrid grid = build_grid(m, counts);
    SweepRow row;
    row.c = c;
    row.e4 = total_energy(EnergyKind::p_energy(4.0), map, grid).total;
    row.e4_normalized = row.e4 / (m * m);
    row.bound = suspension_e4_bound(m, c);
    row.degree = topological_degree(map, grid).degree;
    row.grid_id = grid.id();
    out.rows.push_back(row);
  }
  out.decreasing = true;
  out.within_bound = true;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    if (i > 0 && !(out.rows[i].e4 < out.rows[i - 1].e4)) out.decreasing = false;
    if (out.rows[i].e4_normalized > out.rows[i].bound + 1e-8) out.within_bound = false;
  }
  return out;
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"c", r.c},
                         {"e4", r.e4},
                         {"e4_over_m2", r.e4_normalized},
                         {"bound", r.bound},
                         {"bound_gap", r.bound - r.e4_normalized},
                         {"degree", r.degree},
                         {"grid", r.grid_id}});
  }
  return {{"m", m}, {"rows", rows_json}, {"strictly_decreasing", decreasing}, {"within_bound", within_bound}};
}

}  // namespace sphvar
