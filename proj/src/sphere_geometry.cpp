#include "sphvar/sphere_geometry.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include "sphvar/reduce.hpp"

namespace sphvar {

SpherePoint::SpherePoint(Vec coords) : coords_(std::move(coords)) {
  if (coords_.size() < 3) throw InvalidArgument("sphere point needs dimension m >= 2");
  if (std::abs(coords_.norm() - 1.0) > 1e-12) {
    throw InvalidArgument("sphere point is not of unit norm");
  }
}

SpherePoint SpherePoint::normalized(const Vec& v) {
  if (v.size() < 3) throw InvalidArgument("sphere point needs dimension m >= 2");
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidArgument("cannot normalize vector");
  return SpherePoint(Vec(v / norm), Trusted{});
}

TangentVector::TangentVector(SpherePoint b, Vec v) : base(std::move(b)), vec(std::move(v)) {
  if (vec.size() != base.coords().size()) throw InvalidArgument("tangent vector size mismatch");
  if (std::abs(vec.dot(base.coords())) > 1e-10) {
    throw InvalidArgument("vector is not tangent to the sphere at its base point");
  }
}

TangentVector TangentVector::project(const SpherePoint& b, const Vec& v) {
  const Vec& x = b.coords();
  return TangentVector(b, Vec(v - v.dot(x) * x));
}

double sphere_volume(int m) {
  return 2.0 * std::pow(kPi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

Mat tangent_frame(const Vec& x) {
  const int n = static_cast<int>(x.size());
  Vec v = x;
  v(0) += x(0) >= 0.0 ? 1.0 : -1.0;
  const Mat h = Mat::Identity(n, n) - (2.0 / v.squaredNorm()) * v * v.transpose();
  return h.rightCols(n - 1);
}

// -- charts -----------------------------------------------------------------

Vec Chart::to_chart(const Vec& x) const {
  const double denom = pole_ == Pole::North ? 1.0 + x(0) : 1.0 - x(0);
  return x.tail(dim_) / denom;
}

Vec Chart::to_sphere(const Vec& u) const {
  const double r2 = u.squaredNorm();
  Vec x(dim_ + 1);
  const double x0 = (1.0 - r2) / (1.0 + r2);
  x(0) = pole_ == Pole::North ? x0 : -x0;
  x.tail(dim_) = 2.0 * u / (1.0 + r2);
  return x;
}

Mat Chart::basis(const Vec& u) const {
  const double r2 = u.squaredNorm();
  const double d = 1.0 + r2;
  Mat b(dim_ + 1, dim_);
  const double sign = pole_ == Pole::North ? 1.0 : -1.0;
  for (int a = 0; a < dim_; ++a) {
    b(0, a) = sign * (-4.0 * u(a) / (d * d));
    for (int k = 0; k < dim_; ++k) {
      b(k + 1, a) = (k == a ? 2.0 / d : 0.0) - 4.0 * u(k) * u(a) / (d * d);
    }
  }
  return b;
}

Mat Chart::metric(const Vec& u) const {
  const double s = scale(u);
  return s * s * Mat::Identity(dim_, dim_);
}

double Chart::christoffel(int k, int i, int j, const Vec& u) {
  const Vec dw = dlog_scale(u);
  double g = 0.0;
  if (k == i) g += dw(j);
  if (k == j) g += dw(i);
  if (i == j) g -= dw(k);
  return g;
}

Chart chart_for(const Vec& x) {
  const int m = static_cast<int>(x.size()) - 1;
  return Chart(x(0) >= 0.0 ? Pole::North : Pole::South, m);
}

// -- finite differences -----------------------------------------------------

std::vector<Eigen::VectorXd> chart_partials(const std::function<Eigen::VectorXd(const Vec&)>& f,
                                            const Vec& u0, double h) {
  const int m = static_cast<int>(u0.size());
  std::vector<Eigen::VectorXd> out(m);
  for (int a = 0; a < m; ++a) {
    auto central = [&](double step) {
      Vec up = u0, dn = u0;
      up(a) += step;
      dn(a) -= step;
      return Eigen::VectorXd((f(up) - f(dn)) / (2.0 * step));
    };
    const Eigen::VectorXd coarse = central(h);
    const Eigen::VectorXd fine = central(0.5 * h);
    out[a] = (4.0 * fine - coarse) / 3.0;
  }
  return out;
}

std::vector<Eigen::VectorXd> chart_second_partials(
    const std::function<Eigen::VectorXd(const Vec&)>& f, const Vec& u0, double h) {
  const int m = static_cast<int>(u0.size());
  const Eigen::VectorXd f0 = f(u0);
  std::vector<Eigen::VectorXd> out(m * m);
  auto shifted = [&](int a, double sa, int b, double sb) {
    Vec u = u0;
    u(a) += sa;
    u(b) += sb;
    return f(u);
  };
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) {
      auto diff = [&](double s) -> Eigen::VectorXd {
        if (a == b) {
          Vec up = u0, dn = u0;
          up(a) += s;
          dn(a) -= s;
          return (f(up) - 2.0 * f0 + f(dn)) / (s * s);
        }
        return (shifted(a, s, b, s) - shifted(a, s, b, -s) - shifted(a, -s, b, s) +
                shifted(a, -s, b, -s)) /
               (4.0 * s * s);
      };
      const Eigen::VectorXd coarse = diff(h);
      const Eigen::VectorXd fine = diff(0.5 * h);
      out[a * m + b] = (4.0 * fine - coarse) / 3.0;
      out[b * m + a] = out[a * m + b];
    }
  }
  return out;
}

// -- quadrature -------------------------------------------------------------

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadratureGrid::QuadratureGrid(int m, std::vector<int> resolution)
    : dim_(m), resolution_(std::move(resolution)) {
  if (m < 2) throw InvalidArgument("grid dimension must be >= 2, got " + std::to_string(m));
  if (m + 1 > kMaxAmbient) throw InvalidArgument("grid dimension too large");
  if (static_cast<int>(resolution_.size()) != m) {
    throw InvalidArgument("grid needs " + std::to_string(m) + " per-angle counts");
  }
  for (int r : resolution_) {
    if (r < 4) throw InvalidArgument("grid resolution must be >= 4 per angle");
  }
  std::vector<double> xi, wi;
  for (int k = 1; k <= m - 1; ++k) {
    const int n = resolution_[k - 1];
    gauss_legendre(n, xi, wi);
    AngleRule rule;
    for (int i = 0; i < n; ++i) {
      const double theta = 0.5 * kPi * (xi[i] + 1.0);
      rule.cos_t.push_back(std::cos(theta));
      rule.sin_t.push_back(std::sin(theta));
      rule.weight.push_back(0.5 * kPi * wi[i] * std::pow(std::sin(theta), m - k));
    }
    rules_.push_back(std::move(rule));
  }
  const int naz = resolution_.back();
  AngleRule az;
  for (int j = 0; j < naz; ++j) {
    const double phi = 2.0 * kPi * (j + 0.5) / naz;
    az.cos_t.push_back(std::cos(phi));
    az.sin_t.push_back(std::sin(phi));
    az.weight.push_back(2.0 * kPi / naz);
  }
  rules_.push_back(std::move(az));
  for (int r : resolution_) size_ *= static_cast<std::size_t>(r);
}

Vec QuadratureGrid::node(std::size_t i) const {
  std::array<int, kMaxAmbient> idx{};
  for (int k = dim_ - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(i % resolution_[k]);
    i /= resolution_[k];
  }
  Vec x(dim_ + 1);
  double prod = 1.0;
  for (int k = 0; k < dim_ - 1; ++k) {
    x(k) = prod * rules_[k].cos_t[idx[k]];
    prod *= rules_[k].sin_t[idx[k]];
  }
  x(dim_ - 1) = prod * rules_[dim_ - 1].cos_t[idx[dim_ - 1]];
  x(dim_) = prod * rules_[dim_ - 1].sin_t[idx[dim_ - 1]];
  return x / x.norm();
}

double QuadratureGrid::weight(std::size_t i) const {
  double w = 1.0;
  for (int k = dim_ - 1; k >= 0; --k) {
    w *= rules_[k].weight[i % resolution_[k]];
    i /= resolution_[k];
  }
  return w;
}

double QuadratureGrid::total_weight() const {
  CompensatedSum acc;
  for (std::size_t i = 0; i < size_; ++i) acc.add(weight(i));
  return acc.value();
}

std::string QuadratureGrid::id() const {
  std::ostringstream os;
  os << "S" << dim_ << "[";
  for (std::size_t k = 0; k < resolution_.size(); ++k) os << (k ? "x" : "") << resolution_[k];
  os << "]";
  return os.str();
}

QuadratureGrid build_grid(int m, int resolution) {
  if (m < 2) throw InvalidArgument("grid dimension must be >= 2, got " + std::to_string(m));
  return QuadratureGrid(m, std::vector<int>(m, resolution));
}

QuadratureGrid build_grid(int m, std::vector<int> resolution) {
  return QuadratureGrid(m, std::move(resolution));
}

double integrate(const QuadratureGrid& grid, std::span<const double> density) {
  if (density.size() != grid.size()) throw InvalidArgument("density size does not match grid");
  CompensatedSum acc;
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (!std::isfinite(density[i])) {
      throw NumericalError("non-finite density at node " + std::to_string(i));
    }
    acc.add(grid.weight(i) * density[i]);
  }
  return acc.value();
}

std::vector<double> sample_density(const QuadratureGrid& grid,
                                   const std::function<double(std::size_t, const Vec&)>& density) {
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { out[i] = density(i, grid.node(i)); });
  return out;
}

double integrate(const QuadratureGrid& grid, const std::function<double(const Vec&)>& density) {
  const auto values = sample_density(grid, [&](std::size_t, const Vec& x) { return density(x); });
  return integrate(grid, values);
}

// -- conformal fields and connection ----------------------------------------

ConformalSample conformal_field(int alpha, const SpherePoint& x) {
  const int m = x.dim();
  if (alpha < 1 || alpha > m + 1) {
    throw InvalidArgument("conformal field index must lie in 1.." + std::to_string(m + 1));
  }
  const Vec& p = x.coords();
  const double f = p(alpha - 1);
  Vec grad = -f * p;
  grad(alpha - 1) += 1.0;
  grad -= grad.dot(p) * p;
  return {f, TangentVector(x, grad)};
}

TangentVector covariant_derivative(const TangentField& field, const TangentVector& X,
                                   const Chart& chart, const FdSteps& steps) {
  const int m = X.base.dim();
  const Vec u0 = chart.to_chart(X.base.coords());
  if (!std::isfinite(u0.squaredNorm()) || u0.norm() > 1e3) {
    throw NumericalError("base point too close to the excluded pole of the chart");
  }
  auto components = [&](const Vec& u) {
    const Vec x = chart.to_sphere(u);
    const Mat b = chart.basis(u);
    const double s2 = std::pow(Chart::scale(u), 2);
    const Vec v = field(x);
    Eigen::VectorXd c(m);
    for (int k = 0; k < m; ++k) c(k) = v.dot(b.col(k)) / s2;
    return c;
  };
  const Mat b0 = chart.basis(u0);
  const double s2 = std::pow(Chart::scale(u0), 2);
  Vec xc(m), vc(m);
  const Eigen::VectorXd v0 = components(u0);
  for (int k = 0; k < m; ++k) {
    xc(k) = X.vec.dot(b0.col(k)) / s2;
    vc(k) = v0(k);
  }
  const auto partials = chart_partials(components, u0, steps.first);
  Vec out = Vec::Zero(m);
  for (int k = 0; k < m; ++k) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += xc(j) * partials[j](k);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) acc += Chart::christoffel(k, i, j, u0) * xc(i) * vc(j);
    }
    out(k) = acc;
  }
  return TangentVector::project(X.base, b0 * out);
}

TangentVector covariant_derivative(const TangentField& field, const TangentVector& X,
                                   const FdSteps& steps) {
  return covariant_derivative(field, X, chart_for(X.base.coords()), steps);
}

double laplacian_fd(const std::function<double(const Vec&)>& f, const SpherePoint& x,
                    const FdSteps& steps) {
  const int m = x.dim();
  const Chart chart = chart_for(x.coords());
  const Vec u0 = chart.to_chart(x.coords());
  auto scalar = [&](const Vec& u) {
    Eigen::VectorXd r(1);
    r(0) = f(chart.to_sphere(u));
    return r;
  };
  const auto d1 = chart_partials(scalar, u0, steps.first);
  const auto d2 = chart_second_partials(scalar, u0, steps.second);
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    double term = d2[i * m + i](0);
    for (int k = 0; k < m; ++k) term -= Chart::christoffel(k, i, i, u0) * d1[k](0);
    acc += term;
  }
  return acc / std::pow(Chart::scale(u0), 2);
}

Vec gradient_fd(const std::function<double(const Vec&)>& f, const SpherePoint& x,
                const FdSteps& steps) {
  const int m = x.dim();
  const Chart chart = chart_for(x.coords());
  const Vec u0 = chart.to_chart(x.coords());
  auto scalar = [&](const Vec& u) {
    Eigen::VectorXd r(1);
    r(0) = f(chart.to_sphere(u));
    return r;
  };
  const auto d1 = chart_partials(scalar, u0, steps.first);
  const Mat b = chart.basis(u0);
  Vec g = Vec::Zero(m + 1);
  for (int a = 0; a < m; ++a) g += d1[a](0) * b.col(a);
  return g / std::pow(Chart::scale(u0), 2);
}

SpherePoint sphere_exp(const SpherePoint& x, const Vec& v, double t) {
  const double len = v.norm();
  if (len == 0.0 || t == 0.0) return x;
  const double angle = t * len;
  const Vec y = std::cos(angle) * x.coords() + std::sin(angle) * (v / len);
  return SpherePoint::normalized(y);
}

void write_grid_csv(const QuadratureGrid& grid, std::ostream& out) {
  const int m = grid.dim();
  for (int k = 0; k <= m; ++k) out << "x_" << k << ",";
  out << "weight\n";
  out.precision(17);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec x = grid.node(i);
    for (int k = 0; k <= m; ++k) out << x(k) << ",";
    out << grid.weight(i) << "\n";
  }
}

}  // namespace sphvar
