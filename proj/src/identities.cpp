#include "sphvar/identities.hpp"

#include <cmath>
#include <ostream>

#include "sphvar/chart_calculus.hpp"
#include "sphvar/reduce.hpp"

namespace sphvar {

Mat curvature_operator_2form(const Mat& sigma) {
  const int m = static_cast<int>(sigma.rows());
  // Round S^m: R(X,Y)Z = <Y,Z>X - <X,Z>Y, Ric = sum_s R(., e_s)e_s.
  auto riemann = [m](const Vec& x, const Vec& y, const Vec& z) { return Vec(y.dot(z) * x - x.dot(z) * y); };
  auto ricci = [&](const Vec& x) {
    Vec r = Vec::Zero(m);
    for (int s = 0; s < m; ++s) r += riemann(x, unit_vector(m, s), unit_vector(m, s));
    return r;
  };
  auto form = [&](const Vec& x, const Vec& y) { return x.dot(sigma * y); };
  Mat out(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const Vec ea = unit_vector(m, a), eb = unit_vector(m, b);
      double v = form(ricci(ea), eb) + form(ea, ricci(eb));
      for (int s = 0; s < m; ++s) v += form(unit_vector(m, s), riemann(ea, eb, unit_vector(m, s)));
      out(a, b) = v;
    }
  }
  return out;
}

nlohmann::json IdentityReport::to_json() const {
  return {{"identity", identity}, {"map", map_id},       {"grid", grid_id}, {"residual", residual},
          {"scale", scale},       {"relative", relative()}, {"tolerance", tolerance}, {"pass", pass},
          {"terms", terms}};
}

namespace {

void check_grid(const MapSpec& map, const QuadratureGrid& grid) {
  if (grid.dim() != map.domain_dim()) {
    throw InvalidArgument("grid is on S^" + std::to_string(grid.dim()) + " but " + map.id() + " is defined on S^" +
                          std::to_string(map.domain_dim()));
  }
}

double form_norm2(const Mat& s) {
  double acc = 0.0;
  for (int a = 0; a < s.rows(); ++a)
    for (int b = a + 1; b < s.cols(); ++b) acc += s(a, b) * s(a, b);
  return acc;
}

}  // namespace

IdentityReport weitzenbock_residual(const MapSpec& map, const QuadratureGrid& grid) {
  check_grid(map, grid);
  if (!map.target().is_surface()) throw InvalidArgument("weitzenbock needs a surface target, got " + map.id());
  const int m = map.domain_dim();
  const std::size_t N = grid.size();
  std::vector<double> d2(N), delta2(N), nabla2(N), sigma2(N);
  parallel_for(N, [&](std::size_t i) {
    const TwoFormJet t = pullback_two_form(map, grid.point(i));
    d2[i] = t.d_norm2;
    delta2[i] = t.delta_norm2;
    nabla2[i] = t.nabla_norm2;
    sigma2[i] = form_norm2(t.sigma);
  });
  IdentityReport r;
  r.identity = "weitzenbock";
  r.map_id = map.id();
  r.grid_id = grid.id();
  r.terms["d"] = integrate(grid, d2);
  r.terms["delta"] = integrate(grid, delta2);
  r.terms["nabla"] = integrate(grid, nabla2);
  r.terms["curvature"] = (2.0 * m - 4.0) * integrate(grid, sigma2);
  std::vector<double> dens(N);
  for (std::size_t i = 0; i < N; ++i) dens[i] = d2[i] + delta2[i] - nabla2[i] - (2.0 * m - 4.0) * sigma2[i];
  r.residual = integrate(grid, dens);
  r.scale = integrate(grid, sigma2);
  r.tolerance = 1e-3 * r.scale;
  r.pass = std::abs(r.residual) <= r.tolerance;
  return r;
}

bool RefinementStudy::converged() const {
  for (std::size_t k = 1; k < residuals.size(); ++k) {
    if (!(residuals[k] <= std::max(0.5 * residuals[k - 1], floor))) return false;
  }
  return residuals.size() >= 2;
}

void RefinementStudy::write_csv(std::ostream& out) const {
  out << "resolution,residual\n";
  char buf[40];
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", residuals[k]);
    out << resolutions[k] << ',' << buf << '\n';
  }
}

RefinementStudy weitzenbock_refinement(const MapSpec& map, const std::vector<int>& resolutions) {
  RefinementStudy s;
  s.map_id = map.id();
  for (int res : resolutions) {
    const IdentityReport r = weitzenbock_residual(map, build_grid(map.domain_dim(), res));
    s.resolutions.push_back(res);
    s.residuals.push_back(r.relative());
  }
  return s;
}

double closedness_sup(const MapSpec& map, const QuadratureGrid& grid) {
  check_grid(map, grid);
  const auto d = sample_density(
      grid, [&](std::size_t, const Vec& x) { return std::sqrt(pullback_two_form(map, SpherePoint::normalized(x)).d_norm2); });
  double sup = 0.0;
  for (double v : d) sup = std::max(sup, v);
  return sup;
}

double magic_lemma_residual(const MapSpec& map, const SpherePoint& x, const Vec& X, const Vec& Y, const Vec& Z) {
  const SymmetricJet sj = pullback_metric_jet(map, x);
  const MapJet jet = eval_jet(map, x, 2);
  const Mat& F = sj.frame.frame;
  const Vec xc = F.transpose() * X, yc = F.transpose() * Y, zc = F.transpose() * Z;
  const int m = x.dim();
  double lhs = 0.0;
  for (int c = 0; c < m; ++c)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) lhs += sj.nabla(c, a, b) * xc(c) * yc(a) * zc(b);
  const double rhs = jet.second_form(X, Y).dot(jet.push(Z)) + jet.push(Y).dot(jet.second_form(X, Z));
  return std::abs(lhs - rhs);
}

IdentityReport nakauchi_weitzenbock_residual(const MapSpec& map, const QuadratureGrid& grid) {
  check_grid(map, grid);
  const int m = map.domain_dim();
  const double K = map.target().curvature();
  const std::size_t N = grid.size();
  std::vector<double> t1(N), t2(N), t3a(N), t3b(N), t4(N);
  parallel_for(N, [&](std::size_t i) {
    const SpherePoint p = grid.point(i);
    const MapJet jet = eval_jet(map, p, 2);
    const PullbackPointData pd = pullback_data(jet);
    t1[i] = 0.5 * pullback_metric_jet(map, p).nabla_norm2;
    double second = 0.0, ric_domain = 0.0, ric_target = 0.0;
    for (int a = 0; a < m; ++a) {
      const double l2 = pd.eigenvalues(a);
      // |nabla dphi(e_a, .)|^2 with e_a the a-th eigenvector.
      double row = 0.0;
      for (int l = 0; l < m; ++l) {
        Vec acc = Vec::Zero(jet.value.size());
        for (int k = 0; k < m; ++k) acc += pd.eigenvectors(k, a) * jet.hess(k, l);
        row += acc.squaredNorm();
      }
      second += l2 * row;
      ric_domain += (m - 1) * l2 * l2;
      ric_target -= K * l2 * (pd.energy_density * l2 - l2 * l2);
    }
    t2[i] = second;
    t3a[i] = ric_domain;
    t3b[i] = ric_target;
    t4[i] = -jet.tension().dot(cauchy_green_divergence(map, p));
  });
  IdentityReport r;
  r.identity = "nakauchi";
  r.map_id = map.id();
  r.grid_id = grid.id();
  r.terms["half_nabla_metric"] = integrate(grid, t1);
  r.terms["second_fundamental_form"] = integrate(grid, t2);
  r.terms["ricci_domain"] = integrate(grid, t3a);
  r.terms["ricci_target"] = integrate(grid, t3b);
  r.terms["tension"] = integrate(grid, t4);
  std::vector<double> dens(N);
  for (std::size_t i = 0; i < N; ++i) dens[i] = t1[i] + t2[i] + t3a[i] + t3b[i] + t4[i];
  r.residual = integrate(grid, dens);
  for (const auto& [name, v] : r.terms) r.scale = std::max(r.scale, std::abs(v));
  r.tolerance = 1e-3 * r.scale;
  r.pass = std::abs(r.residual) <= r.tolerance;
  return r;
}

InequalityReport inequality_check(const MapSpec& map, const QuadratureGrid& grid) {
  check_grid(map, grid);
  const TargetGeometry target = map.target();
  const int n = target.n;
  const double c = (n - 1.0) / (2.0 * n);
  struct NodeGap {
    double gap_i, gap_ii, scale;
  };
  std::vector<NodeGap> gaps(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const PullbackPointData pd = pullback_data(eval_jet(map, grid.point(i), 1));
    const double e2 = pd.energy_density * pd.energy_density;
    gaps[i] = {pd.has_omega ? pd.sigma2 - pd.omega_norm2 : 0.0, c * e2 - pd.sigma2, std::max(1.0, e2)};
  });
  InequalityReport r;
  r.map_id = map.id();
  r.nodes = grid.size();
  r.has_i = target.is_surface();
  r.equality_i = r.has_i;
  r.equality_ii = true;
  std::size_t strict = 0;
  for (const auto& g : gaps) {
    r.max_violation_i = std::max(r.max_violation_i, -g.gap_i / g.scale);
    r.max_violation_ii = std::max(r.max_violation_ii, -g.gap_ii / g.scale);
    r.max_gap_i = std::max(r.max_gap_i, g.gap_i);
    r.max_gap_ii = std::max(r.max_gap_ii, g.gap_ii);
    if (std::abs(g.gap_i) > r.tolerance * g.scale) r.equality_i = false;
    if (std::abs(g.gap_ii) > r.tolerance * g.scale) {
      r.equality_ii = false;
      ++strict;
    }
  }
  r.strict_fraction_ii = grid.size() ? static_cast<double>(strict) / grid.size() : 0.0;
  return r;
}

nlohmann::json InequalityReport::to_json() const {
  nlohmann::json j = {{"map", map_id},
                      {"nodes", nodes},
                      {"max_violation_ii", max_violation_ii},
                      {"max_gap_ii", max_gap_ii},
                      {"equality_ii", equality_ii},
                      {"strict_fraction_ii", strict_fraction_ii},
                      {"tolerance", tolerance},
                      {"pass", pass()}};
  if (has_i) {
    j["max_violation_i"] = max_violation_i;
    j["max_gap_i"] = max_gap_i;
    j["equality_i"] = equality_i;
  }
  return j;
}

std::vector<InequalityReport> inequality_suite(const std::vector<MapSpec>& maps, int res) {
  std::vector<InequalityReport> out;
  for (const auto& map : maps) out.push_back(inequality_check(map, build_grid(map.domain_dim(), res)));
  return out;
}

}  // namespace sphvar
