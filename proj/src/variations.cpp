#include "sphvar/variations.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "sphvar/chart_calculus.hpp"
#include "sphvar/reduce.hpp"

namespace sphvar {

namespace {

Vec cross3(const Vec& a, const Vec& b) {
  Vec r(3);
  r(0) = a(1) * b(2) - a(2) * b(1);
  r(1) = a(2) * b(0) - a(0) * b(2);
  r(2) = a(0) * b(1) - a(1) * b(0);
  return r;
}

// d v = nabla v - (<v, dphi e_i> / r^2) y, since <v, y> = 0.
Mat ambient_from_covariant(const MapJet& jet, const Vec& v, const Mat& cov) {
  const double r2 = jet.target.radius * jet.target.radius;
  Mat out = cov;
  for (int i = 0; i < jet.m(); ++i) out.col(i) -= (v.dot(jet.dphi.col(i)) / r2) * jet.value;
  return out;
}

class PushforwardField final : public VariationField {
 public:
  explicit PushforwardField(int alpha) : alpha_(alpha) {}
  int jet_order() const override { return 2; }
  std::string tag() const override { return "pushforward(" + std::to_string(alpha_) + ")"; }
  VariationSample sample(const MapJet& jet) const override {
    if (!jet.has_second()) throw InvalidArgument("pushforward fields need a 2-jet");
    const ConformalSample c = conformal_field(alpha_, SpherePoint::normalized(jet.x));
    const Vec g = jet.frame.transpose() * c.grad.vec;
    VariationSample s;
    s.v = jet.dphi * g;
    s.cov = -c.f * jet.dphi;
    for (int i = 0; i < jet.m(); ++i)
      for (int j = 0; j < jet.m(); ++j) s.cov.col(i) += g(j) * jet.hess(i, j);
    s.ambient = ambient_from_covariant(jet, s.v, s.cov);
    return s;
  }

 private:
  int alpha_;
};

class PullbackField final : public VariationField {
 public:
  explicit PullbackField(int alpha) : alpha_(alpha) {}
  std::string tag() const override { return "pullback(" + std::to_string(alpha_) + ")"; }
  VariationSample sample(const MapJet& jet) const override {
    const int n1 = static_cast<int>(jet.value.size());
    if (alpha_ < 1 || alpha_ > n1) throw InvalidArgument("pullback field index must lie in 1.." + std::to_string(n1));
    const double r2 = jet.target.radius * jet.target.radius;
    const double f = jet.value(alpha_ - 1);
    VariationSample s;
    s.v = unit_vector(n1, alpha_ - 1) - (f / r2) * jet.value;
    s.cov = -(f / r2) * jet.dphi;
    s.ambient = ambient_from_covariant(jet, s.v, s.cov);
    return s;
  }

 private:
  int alpha_;
};

class CustomField final : public VariationField {
 public:
  CustomField(std::uint64_t seed, int m, int n) : seed_(seed), m_(m), n_(n) {
    std::mt19937_64 rng(seed);
    auto uniform = [&] { return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0; };
    const int d = m + 1;
    c0_.resize(n + 1);
    c1_.resize(n + 1, d);
    c2_.assign(n + 1, Eigen::MatrixXd::Zero(d, d));
    for (int a = 0; a <= n; ++a) {
      c0_(a) = uniform();
      for (int k = 0; k < d; ++k) c1_(a, k) = uniform();
      for (int k = 0; k < d; ++k)
        for (int l = k; l < d; ++l) c2_[a](k, l) = uniform();
    }
  }
  std::string tag() const override {
    return "custom(" + std::to_string(seed_) + ":" + std::to_string(m_) + ":" + std::to_string(n_) + ")";
  }
  VariationSample sample(const MapJet& jet) const override {
    if (jet.m() != m_ || jet.n() != n_) throw InvalidArgument("custom field " + tag() + " does not fit this map");
    const int d = m_ + 1;
    // W and its derivative along the frame.
    Vec W(n_ + 1);
    Mat dW(n_ + 1, m_);
    const Vec& x = jet.x;
    for (int a = 0; a <= n_; ++a) {
      double w = c0_(a);
      Eigen::VectorXd grad = c1_.row(a).transpose();
      for (int k = 0; k < d; ++k) {
        w += c1_(a, k) * x(k);
        for (int l = k; l < d; ++l) {
          const double c = c2_[a](k, l);
          w += c * x(k) * x(l);
          grad(k) += c * x(l);
          grad(l) += c * x(k);
        }
      }
      W(a) = w;
      dW.row(a) = (jet.frame.transpose() * grad).transpose();
    }
    const double r2 = jet.target.radius * jet.target.radius;
    const Vec& y = jet.value;
    const double wy = W.dot(y);
    VariationSample s;
    s.v = W - (wy / r2) * y;
    s.ambient.resize(n_ + 1, m_);
    s.cov.resize(n_ + 1, m_);
    for (int i = 0; i < m_; ++i) {
      const Vec dy = jet.dphi.col(i);
      const Vec dv = dW.col(i) - ((dW.col(i).dot(y) + W.dot(dy)) / r2) * y - (wy / r2) * dy;
      s.ambient.col(i) = dv;
      s.cov.col(i) = jet.target.project(y, dv);
    }
    return s;
  }

 private:
  std::uint64_t seed_;
  int m_, n_;
  Eigen::VectorXd c0_;
  Eigen::MatrixXd c1_;
  std::vector<Eigen::MatrixXd> c2_;
};

class ScaledField final : public VariationField {
 public:
  ScaledField(FieldPtr v, double s) : v_(std::move(v)), s_(s) {}
  int jet_order() const override { return v_->jet_order(); }
  std::string tag() const override { return std::to_string(s_) + "*" + v_->tag(); }
  VariationSample sample(const MapJet& jet) const override {
    VariationSample s = v_->sample(jet);
    s.v *= s_;
    s.cov *= s_;
    s.ambient *= s_;
    return s;
  }

 private:
  FieldPtr v_;
  double s_;
};

class SumField final : public VariationField {
 public:
  SumField(FieldPtr u, FieldPtr v, double s) : u_(std::move(u)), v_(std::move(v)), s_(s) {}
  int jet_order() const override { return std::max(u_->jet_order(), v_->jet_order()); }
  std::string tag() const override { return u_->tag() + "+" + std::to_string(s_) + "*" + v_->tag(); }
  VariationSample sample(const MapJet& jet) const override {
    VariationSample a = u_->sample(jet);
    const VariationSample b = v_->sample(jet);
    a.v += s_ * b.v;
    a.cov += s_ * b.cov;
    a.ambient += s_ * b.ambient;
    return a;
  }

 private:
  FieldPtr u_, v_;
  double s_;
};

class ZeroField final : public VariationField {
 public:
  std::string tag() const override { return "zero"; }
  VariationSample sample(const MapJet& jet) const override {
    VariationSample s;
    s.v = Vec::Zero(jet.value.size());
    s.cov = Mat::Zero(jet.value.size(), jet.m());
    s.ambient = s.cov;
    return s;
  }
};

MapJet jet_for(const MapSpec& map, const Vec& x, int order) {
  return eval_jet(map, SpherePoint::normalized(x), order);
}

void check_grid(const MapSpec& map, const QuadratureGrid& grid) {
  if (grid.dim() != map.domain_dim()) {
    throw InvalidArgument("grid is on S^" + std::to_string(grid.dim()) + " but " + map.id() + " is defined on S^" +
                          std::to_string(map.domain_dim()));
  }
}

void check_kind(const EnergyKind& kind, const MapSpec& map) {
  if (kind.type == EnergyType::PEnergy) {
    throw InvalidArgument("variations are implemented for dirichlet, sigma2, symplectic and coupled kinds");
  }
  if (kind.needs_omega() && !map.target().is_surface()) {
    throw InvalidArgument("energy kind " + kind.name() + " needs a surface target; " + map.id() + " maps into S^" +
                          std::to_string(map.target().n));
  }
}

// Step of a first or second difference, checked against the injectivity
// radius condition.
void check_step(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid, double t) {
  const auto norms = sample_density(grid, [&](std::size_t, const Vec& x) {
    return v.sample(jet_for(map, x, v.jet_order())).v.norm();
  });
  double vmax = 0.0;
  for (double n : norms) vmax = std::max(vmax, n);
  if (std::abs(t) * vmax / map.target().radius >= kPi / 4.0) {
    throw InvalidArgument("deformation step too large: |t| max|v| / r = " +
                          std::to_string(std::abs(t) * vmax / map.target().radius) + " >= pi/4");
  }
}

}  // namespace

FieldPtr pushforward_field(int alpha) { return std::make_shared<PushforwardField>(alpha); }
FieldPtr pullback_field(int alpha) { return std::make_shared<PullbackField>(alpha); }
FieldPtr custom_field(std::uint64_t seed, int m, int n) { return std::make_shared<CustomField>(seed, m, n); }
FieldPtr scaled_field(FieldPtr v, double s) { return std::make_shared<ScaledField>(std::move(v), s); }
FieldPtr sum_field(FieldPtr u, FieldPtr v, double s) {
  return std::make_shared<SumField>(std::move(u), std::move(v), s);
}
FieldPtr zero_field() { return std::make_shared<ZeroField>(); }

std::vector<FieldPtr> field_family(FieldFamily family, const MapSpec& map) {
  std::vector<FieldPtr> out;
  switch (family) {
    case FieldFamily::Pushforward:
      for (int a = 1; a <= map.domain_dim() + 1; ++a) out.push_back(pushforward_field(a));
      break;
    case FieldFamily::Pullback:
      for (int a = 1; a <= map.target().n + 1; ++a) out.push_back(pullback_field(a));
      break;
    case FieldFamily::Custom:
      throw InvalidArgument("custom fields do not form a family; use pushforward or pullback");
  }
  return out;
}

FieldFamily parse_family(std::string_view name) {
  if (name == "pushforward") return FieldFamily::Pushforward;
  if (name == "pullback") return FieldFamily::Pullback;
  throw InvalidArgument("unknown variation family '" + std::string(name) + "' (expected pushforward or pullback)");
}

std::string family_name(FieldFamily family) {
  switch (family) {
    case FieldFamily::Pushforward: return "pushforward";
    case FieldFamily::Pullback: return "pullback";
    case FieldFamily::Custom: return "custom";
  }
  return "?";
}

VariationSamples sample_field(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid) {
  check_grid(map, grid);
  VariationSamples out;
  out.map_id = map.id();
  out.tag = v.tag();
  out.values.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const MapJet jet = jet_for(map, grid.node(i), v.jet_order());
    const Vec s = v.sample(jet).v;
    if (std::abs(s.dot(jet.value)) > 1e-10 * std::max(1.0, s.norm())) {
      throw NumericalError("variation field " + v.tag() + " is not tangent at node " + std::to_string(i));
    }
    out.values[i] = s;
  });
  return out;
}

// -- first variation --------------------------------------------------------

namespace {

Vec symplectic_gradient(const MapSpec& map, const SpherePoint& x, const MapJet& jet, Vec* dphi_z = nullptr) {
  const TwoFormJet tf = pullback_two_form(map, x);
  const Vec dz = jet.push(tf.delta_sharp);
  if (dphi_z != nullptr) *dphi_z = dz;
  return -map.target().complex_structure(jet.value, dz);
}

}  // namespace

Vec energy_gradient(const EnergyKind& kind, const MapSpec& map, const SpherePoint& x) {
  check_kind(kind, map);
  const MapJet jet = eval_jet(map, x, 2);
  switch (kind.type) {
    case EnergyType::Dirichlet: return jet.tension();
    case EnergyType::SymplecticDirichlet: return symplectic_gradient(map, x, jet);
    case EnergyType::SigmaTwo: return sigma2_tension(map, x);
    case EnergyType::Coupled: return jet.tension() + kind.kappa * energy_gradient(kind.second_kind(), map, x);
    case EnergyType::PEnergy: break;
  }
  throw InvalidArgument("no Euler-Lagrange operator for " + kind.name());
}

ELResidual el_residual(const EnergyKind& kind, const MapSpec& map, const QuadratureGrid& grid) {
  check_grid(map, grid);
  check_kind(kind, map);
  ELResidual r;
  r.kind = kind;
  r.map_id = map.id();
  r.grid_id = grid.id();
  r.residual.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const SpherePoint x = grid.point(i);
    if (kind.type == EnergyType::SymplecticDirichlet) {
      Vec dz;
      symplectic_gradient(map, x, eval_jet(map, x, 1), &dz);
      r.residual[i] = dz;
    } else {
      r.residual[i] = energy_gradient(kind, map, x);
    }
  });
  for (const auto& v : r.residual) r.sup = std::max(r.sup, v.norm());
  return r;
}

nlohmann::json ELResidual::to_json() const {
  return {{"kind", kind.name()}, {"map", map_id}, {"grid", grid_id}, {"sup", sup}, {"nodes", residual.size()}};
}

double first_variation(const EnergyKind& kind, const MapSpec& map, const VariationField& v,
                       const QuadratureGrid& grid) {
  check_grid(map, grid);
  const auto dens = sample_density(grid, [&](std::size_t, const Vec& x) {
    const SpherePoint p = SpherePoint::normalized(x);
    const Vec g = energy_gradient(kind, map, p);
    return -g.dot(v.sample(eval_jet(map, p, v.jet_order())).v);
  });
  return integrate(grid, dens);
}

double codifferential_sup(const MapSpec& map, const QuadratureGrid& grid) {
  check_grid(map, grid);
  const auto norms = sample_density(grid, [&](std::size_t, const Vec& x) {
    return std::sqrt(pullback_two_form(map, SpherePoint::normalized(x)).delta_norm2);
  });
  double sup = 0.0;
  for (double n : norms) sup = std::max(sup, n);
  return sup;
}

// -- geodesic variations ----------------------------------------------------

DeformedJet deform(const MapJet& jet, const VariationSample& s, double t) {
  const double r2 = jet.target.radius * jet.target.radius;
  const double q = t * t * s.v.squaredNorm() / r2;
  const auto c = detail::cos_sqrt_series(q);
  const auto sn = detail::sinc_sqrt_series(q);
  DeformedJet d;
  d.value = c.f0 * jet.value + (sn.f0 * t) * s.v;
  d.dphi.resize(jet.value.size(), jet.m());
  for (int i = 0; i < jet.m(); ++i) {
    const double dq = 2.0 * t * t * s.v.dot(s.ambient.col(i)) / r2;
    d.dphi.col(i) = (c.f1 * dq) * jet.value + c.f0 * jet.dphi.col(i) + (sn.f1 * dq * t) * s.v +
                    (sn.f0 * t) * s.ambient.col(i);
  }
  return d;
}

std::vector<Vec> geodesic_deform(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid,
                                 double t) {
  check_grid(map, grid);
  check_step(map, v, grid, t);
  std::vector<Vec> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const MapJet jet = jet_for(map, grid.node(i), v.jet_order());
    out[i] = deform(jet, v.sample(jet), t).value;
  });
  return out;
}

namespace {

constexpr double kFdStep = 1e-2;

// Per-node Richardson-combined difference quotient of the energy density along
// phi_t; order 1 gives the central first difference, order 2 the second.
double variation_fd(const EnergyKind& kind, const MapSpec& map, const VariationField& v,
                    const QuadratureGrid& grid, int order) {
  check_step(map, v, grid, kFdStep);
  const TargetGeometry target = map.target();
  const auto dens = sample_density(grid, [&](std::size_t, const Vec& x) {
    const MapJet jet = jet_for(map, x, v.jet_order());
    const VariationSample s = v.sample(jet);
    auto e = [&](double t) {
      const DeformedJet d = deform(jet, s, t);
      return energy_density(kind, pullback_data(d.dphi, d.value, target));
    };
    const double e0 = e(0.0);
    auto quotient = [&](double h) {
      if (order == 1) return (e(h) - e(-h)) / (2.0 * h);
      return (e(h) - 2.0 * e0 + e(-h)) / (h * h);
    };
    return (4.0 * quotient(0.5 * kFdStep) - quotient(kFdStep)) / 3.0;
  });
  return integrate(grid, dens);
}

struct Gate {
  bool critical = true;
  double sup = 0.0;
};

Gate criticality(const EnergyKind& kind, const MapSpec& map, const QuadratureGrid& grid,
                 const HessianOptions& opts) {
  Gate g;
  if (!opts.verify_critical) return g;
  g.sup = el_residual(kind, map, grid).sup;
  g.critical = g.sup <= kCriticalityGate;
  return g;
}

void require_critical(const Gate& g, const EnergyKind& kind, const MapSpec& map) {
  if (!g.critical) {
    throw InvalidArgument(map.id() + " is not " + kind.name() + "-critical (Euler-Lagrange residual " +
                          std::to_string(g.sup) + " > " + std::to_string(kCriticalityGate) +
                          "); the Hessian formula does not apply");
  }
}

HessianResult formula_result(const EnergyKind& kind, const MapSpec& map, const VariationField& v, double value,
                             const Gate& g) {
  HessianResult r;
  r.kind = kind;
  r.map_id = map.id();
  r.variation = v.tag();
  r.method = HessianMethod::Formula;
  r.value = value;
  r.critical = g.critical;
  r.el_sup = g.sup;
  return r;
}

// Ric^phi(v, v) for a constant curvature target, in any orthonormal frame.
double ricci_phi(const Mat& dphi, const Vec& v, double K) {
  double acc = 0.0;
  for (int j = 0; j < dphi.cols(); ++j) {
    const double d = v.dot(dphi.col(j));
    acc += dphi.col(j).squaredNorm() * v.squaredNorm() - d * d;
  }
  return K * acc;
}

}  // namespace

double first_variation_fd(const EnergyKind& kind, const MapSpec& map, const VariationField& v,
                          const QuadratureGrid& grid) {
  check_grid(map, grid);
  check_kind(kind, map);
  return variation_fd(kind, map, v, grid, 1);
}

HessianResult hessian_fd(const EnergyKind& kind, const MapSpec& map, const VariationField& v,
                         const QuadratureGrid& grid, const HessianOptions& opts) {
  check_grid(map, grid);
  check_kind(kind, map);
  const Gate g = criticality(kind, map, grid, opts);
  HessianResult r;
  r.kind = kind;
  r.map_id = map.id();
  r.variation = v.tag();
  r.method = HessianMethod::FiniteDifference;
  r.step = kFdStep;
  r.critical = g.critical;
  r.el_sup = g.sup;
  r.value = variation_fd(kind, map, v, grid, 2);
  return r;
}

HessianResult hessian_formula_E(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid,
                                const HessianOptions& opts) {
  check_grid(map, grid);
  const EnergyKind kind = EnergyKind::dirichlet();
  const Gate g = criticality(kind, map, grid, opts);
  require_critical(g, kind, map);
  const double K = map.target().curvature();
  const auto dens = sample_density(grid, [&](std::size_t, const Vec& x) {
    const MapJet jet = jet_for(map, x, v.jet_order());
    const VariationSample s = v.sample(jet);
    return s.cov.squaredNorm() - ricci_phi(jet.dphi, s.v, K);
  });
  return formula_result(kind, map, v, integrate(grid, dens), g);
}

HessianResult hessian_formula_F(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid,
                                const HessianOptions& opts) {
  check_grid(map, grid);
  const EnergyKind kind = EnergyKind::symplectic();
  check_kind(kind, map);
  const Gate g = criticality(kind, map, grid, opts);
  require_critical(g, kind, map);
  const TargetGeometry target = map.target();
  const int order = v.jet_order();
  const auto dens = sample_density(grid, [&](std::size_t, const Vec& x) {
    const SpherePoint p = SpherePoint::normalized(x);
    const MapJet jet = eval_jet(map, p, order);
    const VariationSample s = v.sample(jet);
    const Vec z = pullback_two_form(map, p).delta_sharp;
    const Vec nabla_z = s.cov * (jet.frame.transpose() * z);
    const double second = target.omega(jet.value, s.v, nabla_z);
    // phi* i_v Omega (X) = Omega(v, dphi X) = <dphi X, v x nhat>.
    const double first = one_form_d_norm2(
        map, p,
        [&](const MapJet& j) {
          const Vec w = v.sample(j).v;
          return Vec(j.ambient_differential().transpose() * cross3(w, j.value / j.value.norm()));
        },
        order);
    return first + second;
  });
  return formula_result(kind, map, v, integrate(grid, dens), g);
}

HessianResult hessian_formula_sigma2(const MapSpec& map, const VariationField& v, const QuadratureGrid& grid,
                                     const HessianOptions& opts) {
  check_grid(map, grid);
  const EnergyKind kind = EnergyKind::sigma_two();
  const Gate g = criticality(kind, map, grid, opts);
  require_critical(g, kind, map);
  const double K = map.target().curvature();
  const auto dens = sample_density(grid, [&](std::size_t, const Vec& x) {
    const MapJet jet = jet_for(map, x, v.jet_order());
    const VariationSample s = v.sample(jet);
    const PullbackPointData pd = pullback_data(jet);
    const int m = jet.m();
    const Mat de = jet.dphi * pd.eigenvectors;  // dphi(e_i)
    const Mat ce = s.cov * pd.eigenvectors;     // nabla_{e_i} v
    double div = 0.0, h2 = 0.0, weighted = 0.0;
    for (int i = 0; i < m; ++i) {
      div += ce.col(i).dot(de.col(i));
      for (int j = 0; j < m; ++j) {
        const double h = ce.col(i).dot(de.col(j)) + ce.col(j).dot(de.col(i));
        h2 += h * h;
      }
      const double d = s.v.dot(de.col(i));
      const double curv = K * (de.col(i).squaredNorm() * s.v.squaredNorm() - d * d);
      weighted += pd.eigenvalues(i) * (ce.col(i).squaredNorm() - curv);
    }
    const double grad2 = s.cov.squaredNorm();
    return 2.0 * div * div + pd.energy_density * (grad2 - ricci_phi(jet.dphi, s.v, K)) - 0.5 * h2 - weighted;
  });
  return formula_result(kind, map, v, integrate(grid, dens), g);
}

HessianResult hessian_formula(const EnergyKind& kind, const MapSpec& map, const VariationField& v,
                              const QuadratureGrid& grid, const HessianOptions& opts) {
  check_kind(kind, map);
  switch (kind.type) {
    case EnergyType::Dirichlet: return hessian_formula_E(map, v, grid, opts);
    case EnergyType::SymplecticDirichlet: return hessian_formula_F(map, v, grid, opts);
    case EnergyType::SigmaTwo: return hessian_formula_sigma2(map, v, grid, opts);
    case EnergyType::Coupled: {
      const Gate g = criticality(kind, map, grid, opts);
      require_critical(g, kind, map);
      const HessianOptions inner{false};
      const double e = hessian_formula_E(map, v, grid, inner).value;
      const double q = hessian_formula(kind.second_kind(), map, v, grid, inner).value;
      return formula_result(kind, map, v, e + kind.kappa * q, g);
    }
    case EnergyType::PEnergy: break;
  }
  throw InvalidArgument("no Hessian formula for " + kind.name());
}

nlohmann::json HessianResult::to_json() const {
  nlohmann::json j = {{"kind", kind.name()},
                      {"map", map_id},
                      {"variation", variation},
                      {"method", method == HessianMethod::Formula ? "formula" : "fd"},
                      {"value", value},
                      {"critical", critical},
                      {"el_sup", el_sup}};
  if (method == HessianMethod::FiniteDifference) {
    j["fd"] = {{"steps", {step, 0.5 * step}}, {"extrapolation", "richardson"}};
  }
  return j;
}

// -- averaging --------------------------------------------------------------

namespace {

double doubled_energy(const EnergyKind& kind, const MapSpec& map, const QuadratureGrid& grid) {
  return 2.0 * total_energy(kind, map, grid).total;
}

}  // namespace

std::optional<double> predicted_trace(const EnergyKind& kind, const MapSpec& map, FieldFamily family,
                                      const QuadratureGrid& grid) {
  if (family != FieldFamily::Pushforward) return std::nullopt;
  const int m = map.domain_dim();
  switch (kind.type) {
    case EnergyType::Dirichlet: return (2.0 - m) * doubled_energy(kind, map, grid);
    case EnergyType::SymplecticDirichlet:
    case EnergyType::SigmaTwo: return 2.0 * (4.0 - m) * doubled_energy(kind, map, grid);
    case EnergyType::Coupled:
      return (2.0 - m) * doubled_energy(EnergyKind::dirichlet(), map, grid) +
             2.0 * kind.kappa * (4.0 - m) * doubled_energy(kind.second_kind(), map, grid);
    case EnergyType::PEnergy: break;
  }
  return std::nullopt;
}

TraceResult averaged_hessian_trace(const EnergyKind& kind, const MapSpec& map, FieldFamily family,
                                   const QuadratureGrid& grid, bool with_fd) {
  check_grid(map, grid);
  check_kind(kind, map);
  TraceResult r;
  r.kind = kind;
  r.map_id = map.id();
  r.family = family_name(family);
  const Gate g = criticality(kind, map, grid, {});
  r.critical = g.critical;
  r.el_sup = g.sup;
  require_critical(g, kind, map);
  const HessianOptions inner{false};
  CompensatedSum formula_sum, fd_sum;
  for (const auto& v : field_family(family, map)) {
    r.per_alpha.push_back(hessian_formula(kind, map, *v, grid, inner).value);
    formula_sum.add(r.per_alpha.back());
    if (with_fd) {
      r.per_alpha_fd.push_back(hessian_fd(kind, map, *v, grid, inner).value);
      fd_sum.add(r.per_alpha_fd.back());
    }
  }
  r.trace = formula_sum.value();
  r.trace_fd = fd_sum.value();
  r.predicted = predicted_trace(kind, map, family, grid);
  const int m = map.domain_dim();
  if (r.predicted) {
    if (kind.type == EnergyType::Coupled) {
      r.scale = std::abs((2.0 - m) * doubled_energy(EnergyKind::dirichlet(), map, grid));
    } else {
      r.coefficient = kind.type == EnergyType::Dirichlet ? 2.0 - m : 2.0 * (4.0 - m);
      r.integrand = doubled_energy(kind, map, grid);
      r.scale = *r.coefficient != 0.0 ? std::abs(*r.coefficient) * r.integrand : r.integrand;
    }
  }
  return r;
}

std::optional<double> TraceResult::ratio() const {
  if (coefficient) {
    if (integrand <= 0.0) return std::nullopt;
    return trace / integrand;
  }
  return std::nullopt;
}

std::optional<double> TraceResult::ratio_error() const {
  if (!predicted || !(scale > 0.0)) return std::nullopt;
  return std::abs(trace - *predicted) / scale;
}

nlohmann::json TraceResult::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j = {{"kind", kind.name()},
                      {"map", map_id},
                      {"family", family},
                      {"per_alpha", per_alpha},
                      {"trace", trace},
                      {"predicted_trace", opt(predicted)},
                      {"coefficient", opt(coefficient)},
                      {"ratio", opt(ratio())},
                      {"ratio_error", opt(ratio_error())},
                      {"critical", critical},
                      {"el_sup", el_sup}};
  if (!per_alpha_fd.empty()) {
    j["per_alpha_fd"] = per_alpha_fd;
    j["trace_fd"] = trace_fd;
  }
  return j;
}

// -- thresholds -------------------------------------------------------------

ThresholdResult stability_threshold(const MapSpec& map, EnergyType second, const QuadratureGrid& grid) {
  if (map.domain_dim() != 3) throw InvalidArgument("stability thresholds are stated for maps on S^3");
  if (second != EnergyType::SigmaTwo && second != EnergyType::SymplecticDirichlet) {
    throw InvalidArgument("threshold coupling must be sigma2 or symplectic");
  }
  ThresholdResult r;
  r.map_id = map.id();
  r.second = second;
  r.dirichlet_integral = doubled_energy(EnergyKind::dirichlet(), map, grid);
  const EnergyKind sk = second == EnergyType::SigmaTwo ? EnergyKind::sigma_two() : EnergyKind::symplectic();
  check_kind(sk, map);
  r.second_integral = doubled_energy(sk, map, grid);
  if (r.second_integral <= 1e-12) {
    r.infinite = true;
    r.kappa_star = std::numeric_limits<double>::infinity();
  } else {
    r.kappa_star = r.dirichlet_integral / (2.0 * r.second_integral);
  }
  return r;
}

nlohmann::json ThresholdResult::to_json() const {
  return {{"map", map_id},
          {"coupling", second == EnergyType::SigmaTwo ? "sigma2" : "symplectic"},
          {"dirichlet_integral", dirichlet_integral},
          {"second_integral", second_integral},
          {"kappa_star", infinite ? nlohmann::json("inf") : nlohmann::json(kappa_star)},
          {"infinite", infinite}};
}

ScalarField ScalarField::constant(double c) {
  return {[c](const Vec&) { return c; }, [](const Vec& x) { return Vec(Vec::Zero(x.size())); },
          "constant:" + std::to_string(c)};
}

ScalarField ScalarField::coordinate(int alpha) {
  return {[alpha](const Vec& x) { return conformal_field(alpha, SpherePoint::normalized(x)).f; },
          [alpha](const Vec& x) { return conformal_field(alpha, SpherePoint::normalized(x)).grad.vec; },
          "f" + std::to_string(alpha)};
}

double stability_inequality_lhs(const MapSpec& map, const ScalarField& f, const QuadratureGrid& grid) {
  check_grid(map, grid);
  const TargetGeometry target = map.target();
  if (target.radius != 1.0) {
    throw InvalidArgument("the stability inequality is stated for the unit sphere S^n; " + map.id() +
                          " maps into a sphere of radius " + std::to_string(target.radius));
  }
  const int n = target.n;
  const auto dens = sample_density(grid, [&](std::size_t, const Vec& x) {
    const SpherePoint p = SpherePoint::normalized(x);
    const MapJet jet = eval_jet(map, p, 1);
    const PullbackPointData pd = pullback_data(jet);
    const double fv = f.value(x);
    const Vec g = f.grad ? f.grad(x) : gradient_fd(f.value, p);
    return (n - 1) * (g.squaredNorm() * pd.energy_density - jet.push(g).squaredNorm()) +
           2.0 * (4 - n) * fv * fv * pd.sigma2;
  });
  return integrate(grid, dens);
}

}  // namespace sphvar
