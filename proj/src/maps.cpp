#include "sphvar/maps.hpp"

#include <charconv>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "sphvar/reduce.hpp"

namespace sphvar {

// -- target -----------------------------------------------------------------

TargetGeometry TargetGeometry::sphere(int n, double radius) {
  if (n < 1) throw InvalidArgument("target dimension must be >= 1");
  if (!(radius > 0.0)) throw InvalidArgument("target radius must be positive");
  return TargetGeometry{n, radius};
}

double TargetGeometry::volume() const { return std::pow(radius, n) * sphere_volume(n); }

Vec TargetGeometry::complex_structure(const Vec& y, const Vec& w) const {
  if (n != 2) throw InvalidArgument("complex structure is only defined on surface targets");
  const Vec nh = y / y.norm();
  Vec r(3);
  r(0) = nh(1) * w(2) - nh(2) * w(1);
  r(1) = nh(2) * w(0) - nh(0) * w(2);
  r(2) = nh(0) * w(1) - nh(1) * w(0);
  return r;
}

double TargetGeometry::omega(const Vec& y, const Vec& u, const Vec& w) const {
  return u.dot(complex_structure(y, w));
}

Vec TargetGeometry::exp(const Vec& y, const Vec& w) const {
  const double s = w.squaredNorm() / (radius * radius);
  Vec out = cos_sqrt(s) * y + sinc_sqrt(s) * w;
  return out * (radius / out.norm());
}

// -- formulas ---------------------------------------------------------------

namespace {

using std::sqrt;

template <class S>
std::vector<S> normalized(std::span<const S> x) {
  S r2 = x[0] * x[0];
  for (std::size_t k = 1; k < x.size(); ++k) r2 += x[k] * x[k];
  const S inv = 1.0 / sqrt(r2);
  std::vector<S> out(x.begin(), x.end());
  for (auto& c : out) c = c * inv;
  return out;
}

template <class Derived>
class FormulaMap : public SmoothMap {
 public:
  std::vector<double> apply(std::span<const double> x) const override { return eval(x); }
  std::vector<Jet1> apply(std::span<const Jet1> x) const override { return eval(x); }
  std::vector<Jet2> apply(std::span<const Jet2> x) const override { return eval(x); }

 private:
  template <class S>
  std::vector<S> eval(std::span<const S> x) const {
    if (static_cast<int>(x.size()) != domain_dim() + 1) {
      throw InvalidArgument("input dimension does not match domain of " + id());
    }
    return static_cast<const Derived&>(*this).formula(normalized(x));
  }
};

std::string format_double(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  // Prefer the shortest representation that round-trips.
  for (int p = 1; p <= 17; ++p) {
    char shortbuf[64];
    std::snprintf(shortbuf, sizeof shortbuf, "%.*g", p, c);
    if (std::strtod(shortbuf, nullptr) == c) return shortbuf;
  }
  return buf;
}

class IdentityMap final : public FormulaMap<IdentityMap> {
 public:
  explicit IdentityMap(int m) : m_(m) {}
  int domain_dim() const override { return m_; }
  TargetGeometry target() const override { return TargetGeometry::sphere(m_); }
  std::string id() const override { return "identity:" + std::to_string(m_); }
  template <class S>
  std::vector<S> formula(std::vector<S> x) const {
    return x;
  }

 private:
  int m_;
};

// (z1, z2) -> (Re z1 conj(z2), Im z1 conj(z2), (|z1|^2 - |z2|^2)/2) in S^2(1/2).
class HopfMap final : public FormulaMap<HopfMap> {
 public:
  int domain_dim() const override { return 3; }
  TargetGeometry target() const override { return TargetGeometry::kahler_surface(); }
  std::string id() const override { return "hopf"; }
  template <class S>
  std::vector<S> formula(std::vector<S> x) const {
    return {x[0] * x[2] + x[1] * x[3], x[1] * x[2] - x[0] * x[3],
            0.5 * (x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3])};
  }
};

// Suspension of z -> z with profile 2 arctan(c tan(s/2)); in the north
// stereographic chart this is u -> c u.
class SuspensionMap final : public FormulaMap<SuspensionMap> {
 public:
  SuspensionMap(int m, double c) : m_(m), c_(c) {}
  int domain_dim() const override { return m_; }
  TargetGeometry target() const override { return TargetGeometry::sphere(m_); }
  std::string id() const override { return "suspension:" + std::to_string(m_) + ":" + format_double(c_); }
  template <class S>
  std::vector<S> formula(std::vector<S> x) const {
    const double c2 = c_ * c_;
    const S plus = 1.0 + x[0];
    const S minus = 1.0 - x[0];
    const S inv = 1.0 / (plus + c2 * minus);
    std::vector<S> out(x.size());
    out[0] = (plus - c2 * minus) * inv;
    for (std::size_t k = 1; k < x.size(); ++k) out[k] = (2.0 * c_) * x[k] * inv;
    return out;
  }

 private:
  int m_;
  double c_;
};

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  // Portable uniform in [-1, 1).
  double symmetric() { return 2.0 * ((rng_() >> 11) * 0x1.0p-53) - 1.0; }
  double gaussian() {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = (rng_() >> 11) * 0x1.0p-53;
    const double u2 = (rng_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

// r P(x) / |P(x)| with P = b + (random monomials of degree 1..d). On the unit
// sphere the monomials of one degree have squares summing to at most 1, so the
// remainder is bounded by sqrt(d) |coefficients|; b exceeds that bound and P
// never vanishes.
class PolynomialMap final : public FormulaMap<PolynomialMap> {
 public:
  PolynomialMap(std::uint64_t seed, int degree, int m, int n)
      : seed_(seed), degree_(degree), m_(m), n_(n) {
    if (degree < 1 || degree > 6) throw InvalidArgument("polynomial degree must lie in 1..6");
    if (m < 2 || m + 1 > kMaxAmbient) throw InvalidArgument("polynomial domain dimension out of range");
    if (n < 2 || n + 1 > kMaxAmbient) throw InvalidArgument("polynomial target dimension out of range");
    std::vector<int> e(m + 1, 0);
    enumerate(e, 0, 0);
    Uniform rng(seed);
    coeffs_.assign(n + 1, std::vector<double>(exponents_.size()));
    double frob2 = 0.0;
    for (int a = 0; a <= n; ++a) {
      for (auto& c : coeffs_[a]) {
        c = rng.symmetric();
        frob2 += c * c;
      }
    }
    Eigen::VectorXd dir(n + 1);
    for (int a = 0; a <= n; ++a) dir(a) = rng.gaussian();
    offset_ = dir.normalized() * (1.25 * std::sqrt(degree * frob2));
  }
  int domain_dim() const override { return m_; }
  TargetGeometry target() const override {
    return n_ == 2 ? TargetGeometry::kahler_surface() : TargetGeometry::sphere(n_);
  }
  std::string id() const override {
    return "poly:" + std::to_string(seed_) + ":" + std::to_string(degree_) + ":" + std::to_string(m_) +
           ":" + std::to_string(n_);
  }
  template <class S>
  std::vector<S> formula(std::vector<S> x) const {
    std::vector<std::vector<S>> powers(x.size(), std::vector<S>(degree_ + 1, S(1.0)));
    for (std::size_t k = 0; k < x.size(); ++k) {
      for (int e = 1; e <= degree_; ++e) powers[k][e] = powers[k][e - 1] * x[k];
    }
    std::vector<S> monomials(exponents_.size());
    for (std::size_t t = 0; t < exponents_.size(); ++t) {
      S prod(1.0);
      bool first = true;
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (exponents_[t][k] == 0) continue;
        prod = first ? powers[k][exponents_[t][k]] : prod * powers[k][exponents_[t][k]];
        first = false;
      }
      monomials[t] = prod;
    }
    std::vector<S> out(n_ + 1);
    S norm2(0.0);
    for (int a = 0; a <= n_; ++a) {
      S acc(offset_(a));
      for (std::size_t t = 0; t < exponents_.size(); ++t) acc += coeffs_[a][t] * monomials[t];
      out[a] = acc;
      norm2 += acc * acc;
    }
    const S scale = target().radius / sqrt(norm2);
    for (auto& c : out) c = c * scale;
    return out;
  }

 private:
  void enumerate(std::vector<int>& e, std::size_t k, int used) {
    if (k == e.size()) {
      if (used >= 1) exponents_.push_back(e);
      return;
    }
    for (int p = 0; used + p <= degree_; ++p) {
      e[k] = p;
      enumerate(e, k + 1, used + p);
    }
    e[k] = 0;
  }

  std::uint64_t seed_;
  int degree_, m_, n_;
  std::vector<std::vector<int>> exponents_;
  std::vector<std::vector<double>> coeffs_;
  Eigen::VectorXd offset_;
};

class ReflectionMap final : public FormulaMap<ReflectionMap> {
 public:
  explicit ReflectionMap(int m) : m_(m) {}
  int domain_dim() const override { return m_; }
  TargetGeometry target() const override { return TargetGeometry::sphere(m_); }
  std::string id() const override { return "reflect:" + std::to_string(m_); }
  template <class S>
  std::vector<S> formula(std::vector<S> x) const {
    x[0] = -x[0];
    return x;
  }

 private:
  int m_;
};

class RotationMap final : public FormulaMap<RotationMap> {
 public:
  RotationMap(int m, std::uint64_t seed) : m_(m), seed_(seed) {
    Uniform rng(seed);
    Eigen::MatrixXd g(m + 1, m + 1);
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m; ++j) g(i, j) = rng.gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR();
    for (int j = 0; j <= m; ++j) {
      if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    q_ = q;
  }
  int domain_dim() const override { return m_; }
  TargetGeometry target() const override { return TargetGeometry::sphere(m_); }
  std::string id() const override { return "rotate:" + std::to_string(m_) + ":" + std::to_string(seed_); }
  template <class S>
  std::vector<S> formula(std::vector<S> x) const {
    std::vector<S> out(x.size(), S(0.0));
    for (int i = 0; i <= m_; ++i) {
      S acc(0.0);
      for (int j = 0; j <= m_; ++j) acc += q_(i, j) * x[j];
      out[i] = acc;
    }
    return out;
  }

 private:
  int m_;
  std::uint64_t seed_;
  Eigen::MatrixXd q_;
};

class ConstantMap final : public FormulaMap<ConstantMap> {
 public:
  ConstantMap(int m, int n) : m_(m), n_(n) {}
  int domain_dim() const override { return m_; }
  TargetGeometry target() const override {
    return n_ == 2 ? TargetGeometry::kahler_surface() : TargetGeometry::sphere(n_);
  }
  std::string id() const override { return "constant:" + std::to_string(m_) + ":" + std::to_string(n_); }
  template <class S>
  std::vector<S> formula(std::vector<S>) const {
    std::vector<S> out(n_ + 1, S(0.0));
    out[0] = S(target().radius);
    return out;
  }

 private:
  int m_, n_;
};

class ComposedMap final : public SmoothMap {
 public:
  ComposedMap(MapSpec outer, MapSpec inner) : outer_(std::move(outer)), inner_(std::move(inner)) {
    if (inner_.target().n != outer_.domain_dim()) {
      throw InvalidArgument("cannot compose " + outer_.id() + " after " + inner_.id() +
                            ": inner target dimension differs from outer domain dimension");
    }
  }
  int domain_dim() const override { return inner_.domain_dim(); }
  TargetGeometry target() const override { return outer_.target(); }
  std::string id() const override { return "compose(" + outer_.id() + "," + inner_.id() + ")"; }
  std::vector<double> apply(std::span<const double> x) const override { return chain(x); }
  std::vector<Jet1> apply(std::span<const Jet1> x) const override { return chain(x); }
  std::vector<Jet2> apply(std::span<const Jet2> x) const override { return chain(x); }

 private:
  template <class S>
  std::vector<S> chain(std::span<const S> x) const {
    const std::vector<S> mid = inner_.formula().apply(x);
    return outer_.formula().apply(std::span<const S>(mid));
  }
  MapSpec outer_, inner_;
};

int parse_int(std::string_view s, std::string_view what) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("invalid " + std::string(what) + " '" + std::string(s) + "' in map id");
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("invalid " + std::string(what) + " '" + std::string(s) + "' in map id");
  }
  return v;
}

double parse_double(std::string_view s, std::string_view what) {
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size() || !std::isfinite(v)) {
    throw InvalidArgument("invalid " + std::string(what) + " '" + str + "' in map id");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

void check_dim(int m, std::string_view id) {
  if (m < 2 || m + 1 > kMaxAmbient) {
    throw InvalidArgument("dimension out of range (2.." + std::to_string(kMaxAmbient - 1) + ") in map id '" +
                          std::string(id) + "'");
  }
}

}  // namespace

// -- registry ---------------------------------------------------------------

MapSpec MapSpec::identity(int m) {
  check_dim(m, "identity");
  return MapSpec(std::make_shared<IdentityMap>(m));
}
MapSpec MapSpec::hopf() { return MapSpec(std::make_shared<HopfMap>()); }
MapSpec MapSpec::suspension(int m, double c) {
  check_dim(m, "suspension");
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("suspension requires c > 0");
  return MapSpec(std::make_shared<SuspensionMap>(m, c));
}
MapSpec MapSpec::polynomial(std::uint64_t seed, int degree, int m, int n) {
  return MapSpec(std::make_shared<PolynomialMap>(seed, degree, m, n));
}
MapSpec MapSpec::composed(const MapSpec& outer, const MapSpec& inner) {
  return MapSpec(std::make_shared<ComposedMap>(outer, inner));
}
MapSpec MapSpec::reflection(int m) {
  check_dim(m, "reflect");
  return MapSpec(std::make_shared<ReflectionMap>(m));
}
MapSpec MapSpec::rotation(int m, std::uint64_t seed) {
  check_dim(m, "rotate");
  return MapSpec(std::make_shared<RotationMap>(m, seed));
}
MapSpec MapSpec::constant(int m, int n) {
  check_dim(m, "constant");
  if (n < 2 || n + 1 > kMaxAmbient) throw InvalidArgument("constant map target dimension out of range");
  return MapSpec(std::make_shared<ConstantMap>(m, n));
}

MapSpec MapSpec::parse(std::string_view id) {
  if (id.starts_with("compose(")) {
    if (!id.ends_with(")")) throw InvalidArgument("unbalanced parentheses in map id '" + std::string(id) + "'");
    const std::string_view body = id.substr(8, id.size() - 9);
    int depth = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '(') ++depth;
      if (body[i] == ')') --depth;
      if (body[i] == ',' && depth == 0) {
        return composed(parse(body.substr(0, i)), parse(body.substr(i + 1)));
      }
    }
    throw InvalidArgument("compose(...) needs two comma-separated map ids");
  }
  const auto parts = split(id, ':');
  const std::string_view head = parts[0];
  auto want = [&](std::size_t count) {
    if (parts.size() != count) {
      throw InvalidArgument("map id '" + std::string(id) + "' needs " + std::to_string(count - 1) + " parameters");
    }
  };
  if (head == "identity") {
    want(2);
    return identity(parse_int(parts[1], "dimension"));
  }
  if (head == "hopf") {
    want(1);
    return hopf();
  }
  if (head == "suspension") {
    want(3);
    return suspension(parse_int(parts[1], "dimension"), parse_double(parts[2], "dilation c"));
  }
  if (head == "poly") {
    want(5);
    return polynomial(parse_u64(parts[1], "seed"), parse_int(parts[2], "degree"), parse_int(parts[3], "domain dimension"),
                      parse_int(parts[4], "target dimension"));
  }
  if (head == "reflect") {
    want(2);
    return reflection(parse_int(parts[1], "dimension"));
  }
  if (head == "rotate") {
    want(3);
    return rotation(parse_int(parts[1], "dimension"), parse_u64(parts[2], "seed"));
  }
  if (head == "constant") {
    want(3);
    return constant(parse_int(parts[1], "domain dimension"), parse_int(parts[2], "target dimension"));
  }
  throw InvalidArgument("unknown map id '" + std::string(id) + "'");
}

Vec MapSpec::value(const Vec& x) const {
  const std::vector<double> in(x.data(), x.data() + x.size());
  const auto out = impl_->apply(std::span<const double>(in));
  Vec y(static_cast<int>(out.size()));
  for (std::size_t a = 0; a < out.size(); ++a) y(a) = out[a];
  return y;
}

// -- jets -------------------------------------------------------------------

Vec MapJet::second_form(const Vec& X, const Vec& Y) const {
  const Vec a = frame.transpose() * X;
  const Vec b = frame.transpose() * Y;
  Vec out = Vec::Zero(value.size());
  for (int i = 0; i < m(); ++i)
    for (int j = 0; j < m(); ++j) out += a(i) * b(j) * hess(i, j);
  return out;
}

Vec MapJet::tension() const {
  if (!has_second()) throw InvalidArgument("tension field needs a 2-jet");
  Vec t = Vec::Zero(value.size());
  for (int i = 0; i < m(); ++i) t += hess(i, i);
  return t;
}

namespace {

// Inputs are the geodesic normal-coordinate parametrization
// x(u) = cos|u| x + sin|u|/|u| E u, truncated at the jet order. Christoffel
// symbols vanish at u = 0, so jet Hessians are covariant Hessians.
template <class J>
MapJet jet_from_normal_coordinates(const MapSpec& map, const Vec& x, const Mat& frame) {
  const int m = static_cast<int>(frame.cols());
  std::vector<J> in(m + 1);
  for (int k = 0; k <= m; ++k) {
    in[k].v = x(k);
    in[k].n = m;
    for (int i = 0; i < m; ++i) {
      in[k].g[i] = frame(k, i);
      in[k].set_hess(i, i, -x(k));
    }
  }
  const std::vector<J> out = map.formula().apply(std::span<const J>(in));
  MapJet jet;
  jet.x = x;
  jet.frame = frame;
  jet.target = map.target();
  const int n1 = static_cast<int>(out.size());
  jet.value.resize(n1);
  jet.dphi.resize(n1, m);
  for (int a = 0; a < n1; ++a) {
    jet.value(a) = out[a].v;
    for (int i = 0; i < m; ++i) jet.dphi(a, i) = out[a].g[i];
  }
  if constexpr (J::kOrder == 2) {
    jet.second.resize(n1, m * m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        Vec raw(n1);
        for (int a = 0; a < n1; ++a) raw(a) = out[a].hess(i, j);
        jet.second.col(i * m + j) = jet.target.project(jet.value, raw);
      }
    }
  }
  return jet;
}

}  // namespace

MapJet eval_jet(const MapSpec& map, const SpherePoint& x, int order) {
  if (x.dim() != map.domain_dim()) {
    throw InvalidArgument("point of S^" + std::to_string(x.dim()) + " is not in the domain of " + map.id());
  }
  if (map.mode() == JetMode::FiniteDifference) {
    MapJet jet = eval_jet_fd(map, x);
    if (order < 2) jet.second.resize(jet.value.size(), 0);
    return jet;
  }
  const Mat frame = tangent_frame(x.coords());
  if (order >= 2) return jet_from_normal_coordinates<Jet2>(map, x.coords(), frame);
  return jet_from_normal_coordinates<Jet1>(map, x.coords(), frame);
}

MapJet eval_jet_fd(const MapSpec& map, const SpherePoint& x, const FdSteps& steps) {
  const int m = x.dim();
  const Chart chart = chart_for(x.coords());
  const Vec u0 = chart.to_chart(x.coords());
  const TargetGeometry target = map.target();
  auto f = [&](const Vec& u) {
    const Vec y = map.value(chart.to_sphere(u));
    return Eigen::VectorXd(y);
  };
  const auto d1 = chart_partials(f, u0, steps.first);
  const auto d2 = chart_second_partials(f, u0, steps.second);
  const double s = Chart::scale(u0);
  MapJet jet;
  jet.x = x.coords();
  jet.frame = chart.basis(u0) / s;
  jet.target = target;
  jet.value = map.value(x.coords());
  const int n1 = static_cast<int>(jet.value.size());
  jet.dphi.resize(n1, m);
  for (int a = 0; a < m; ++a) jet.dphi.col(a) = target.project(jet.value, Vec(d1[a] / s));
  jet.second.resize(n1, m * m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      Vec acc = d2[a * m + b];
      for (int c = 0; c < m; ++c) acc -= Chart::christoffel(c, a, b, u0) * Vec(d1[c]);
      jet.second.col(a * m + b) = target.project(jet.value, acc) / (s * s);
    }
  }
  return jet;
}

MapJet reframe(const MapJet& jet, const Mat& rotation) {
  MapJet out = jet;
  const int m = jet.m();
  out.frame = jet.frame * rotation;
  out.dphi = jet.dphi * rotation;
  if (jet.has_second()) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        Vec acc = Vec::Zero(jet.value.size());
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) acc += rotation(k, i) * rotation(l, j) * jet.hess(k, l);
        out.second.col(i * m + j) = acc;
      }
    }
  }
  return out;
}

// -- pullback data ----------------------------------------------------------

PullbackPointData pullback_data(const Mat& dphi, const Vec& value, const TargetGeometry& target) {
  const int m = static_cast<int>(dphi.cols());
  PullbackPointData d;
  d.metric = dphi.transpose() * dphi;
  d.energy_density = d.metric.trace();
  d.metric_norm2 = d.metric.squaredNorm();
  Eigen::SelfAdjointEigenSolver<Mat> solver(d.metric);
  if (solver.info() != Eigen::Success) {
    Mat jittered = d.metric;
    for (int i = 0; i < m; ++i) jittered(i, i) += 1e-13 * (i + 1);
    solver.compute(jittered);
    if (solver.info() != Eigen::Success) throw NumericalError("eigen-decomposition of the pullback metric failed");
  }
  d.eigenvalues = solver.eigenvalues().cwiseMax(0.0);
  d.eigenvectors = solver.eigenvectors();
  double s2 = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) s2 += d.eigenvalues(i) * d.eigenvalues(j);
  d.sigma2 = s2;
  const double cutoff = 1e-9 * d.energy_density;
  for (int i = 0; i < m; ++i) d.rank += d.eigenvalues(i) > cutoff && d.eigenvalues(i) > 0.0 ? 1 : 0;
  if (target.is_surface()) {
    d.has_omega = true;
    d.omega.resize(m, m);
    for (int i = 0; i < m; ++i) {
      d.omega(i, i) = 0.0;
      for (int j = i + 1; j < m; ++j) {
        const double w = target.omega(value, dphi.col(i), dphi.col(j));
        d.omega(i, j) = w;
        d.omega(j, i) = -w;
        d.omega_norm2 += w * w;
      }
    }
  }
  return d;
}

PullbackPointData pullback_data(const MapJet& jet) { return pullback_data(jet.dphi, jet.value, jet.target); }

PullbackPointData pullback_data(const MapJet& jet, const TargetGeometry& target) {
  if (!(target == jet.target)) throw InvalidArgument("jet was evaluated for a different target geometry");
  return pullback_data(jet);
}

Vec tension_field(const MapSpec& map, const SpherePoint& x) { return eval_jet(map, x, 2).tension(); }

DegreeResult topological_degree(const MapSpec& map, const QuadratureGrid& grid) {
  const TargetGeometry target = map.target();
  const int m = map.domain_dim();
  if (target.n != m) throw InvalidArgument("topological degree needs an equidimensional map, got " + map.id());
  if (grid.dim() != m) throw InvalidArgument("grid dimension does not match map domain");
  const auto density = sample_density(grid, [&](std::size_t, const Vec& x) {
    const MapJet jet = eval_jet(map, SpherePoint::normalized(x), 1);
    Mat dom(m + 1, m + 1), tgt(m + 1, m + 1);
    dom.col(0) = x;
    dom.rightCols(m) = jet.frame;
    tgt.col(0) = jet.value / target.radius;
    tgt.rightCols(m) = jet.dphi;
    return tgt.determinant() * (dom.determinant() > 0.0 ? 1.0 : -1.0);
  });
  DegreeResult r;
  r.raw = integrate(grid, density) / target.volume();
  r.degree = std::lround(r.raw);
  if (std::abs(r.raw - static_cast<double>(r.degree)) > 0.1) {
    throw NumericalError("degree integral " + std::to_string(r.raw) +
                         " is not near an integer; increase the grid resolution");
  }
  return r;
}

IsotropyResult isotropy_check(const MapSpec& map, const QuadratureGrid& grid) {
  if (!map.target().is_surface()) throw InvalidArgument("isotropy check needs a surface target, got " + map.id());
  const auto norms = sample_density(grid, [&](std::size_t, const Vec& x) {
    return std::sqrt(pullback_data(eval_jet(map, SpherePoint::normalized(x), 1)).omega_norm2);
  });
  IsotropyResult r;
  for (double v : norms) r.max_norm = std::max(r.max_norm, v);
  r.isotropic = r.max_norm <= 1e-8;
  return r;
}

double suspension_stretch(double c, double s) {
  const double cs = std::cos(s);
  return 2.0 * c / (1.0 + cs + c * c * (1.0 - cs));
}

}  // namespace sphvar
