#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sphvar/jet.hpp"
#include "sphvar/linalg.hpp"
#include "sphvar/sphere_geometry.hpp"

namespace sphvar {

/// Round target sphere S^n(r) in R^{n+1}. For n = 2 it also carries the
/// almost Kaehler structure J v = nhat x v and Omega(u, w) = h(u, J w).
struct TargetGeometry {
  int n = 2;
  double radius = 1.0;

  static TargetGeometry sphere(int n, double radius = 1.0);
  /// CP^1 with the Fubini-Study metric, realized as S^2(1/2).
  static TargetGeometry kahler_surface() { return sphere(2, 0.5); }

  bool is_surface() const { return n == 2; }
  double curvature() const { return 1.0 / (radius * radius); }
  double volume() const;

  /// Tangential projection at y.
  Vec project(const Vec& y, const Vec& w) const { return w - (w.dot(y) / (radius * radius)) * y; }
  Vec complex_structure(const Vec& y, const Vec& w) const;
  double omega(const Vec& y, const Vec& u, const Vec& w) const;
  /// R(X,Y)Z = K(<Y,Z>X - <X,Z>Y), with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
  Vec riemann(const Vec& x, const Vec& y, const Vec& z) const {
    return curvature() * (y.dot(z) * x - x.dot(z) * y);
  }
  /// Great-circle exponential of the target at y.
  Vec exp(const Vec& y, const Vec& w) const;

  bool operator==(const TargetGeometry& o) const { return n == o.n && radius == o.radius; }
};

/// Closed-form ambient formula of a map S^m -> S^n(r). Every formula is
/// homogeneous of degree 0 in its input, so it can be composed with maps whose
/// targets have any radius.
class SmoothMap {
 public:
  virtual ~SmoothMap() = default;
  virtual int domain_dim() const = 0;
  virtual TargetGeometry target() const = 0;
  virtual std::string id() const = 0;

  virtual std::vector<double> apply(std::span<const double> x) const = 0;
  virtual std::vector<Jet1> apply(std::span<const Jet1> x) const = 0;
  virtual std::vector<Jet2> apply(std::span<const Jet2> x) const = 0;
};

enum class JetMode { Analytic, FiniteDifference };

/// A built-in map plus the way its jets are evaluated. Cheap to copy.
///
/// Registry ids: "identity:M", "hopf", "suspension:M:C", "poly:SEED:DEG:M:N",
/// "compose(OUTER,INNER)", "reflect:M", "rotate:M:SEED", "constant:M:N".
class MapSpec {
 public:
  static MapSpec parse(std::string_view id);

  static MapSpec identity(int m);
  static MapSpec hopf();
  static MapSpec suspension(int m, double c);
  static MapSpec polynomial(std::uint64_t seed, int degree, int m, int n);
  static MapSpec composed(const MapSpec& outer, const MapSpec& inner);
  static MapSpec reflection(int m);
  static MapSpec rotation(int m, std::uint64_t seed);
  static MapSpec constant(int m, int n);

  const SmoothMap& formula() const { return *impl_; }
  std::string id() const { return impl_->id(); }
  int domain_dim() const { return impl_->domain_dim(); }
  TargetGeometry target() const { return impl_->target(); }

  JetMode mode() const { return mode_; }
  MapSpec with_mode(JetMode mode) const {
    MapSpec copy = *this;
    copy.mode_ = mode;
    return copy;
  }

  Vec value(const Vec& x) const;

 private:
  explicit MapSpec(std::shared_ptr<const SmoothMap> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const SmoothMap> impl_;
  JetMode mode_ = JetMode::Analytic;
};

using SecondForm = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient,
                                 kMaxAmbient * kMaxAmbient>;

/// Pointwise 2-jet of a map in ambient coordinates, expressed against an
/// orthonormal tangent frame of the domain.
struct MapJet {
  Vec x;           // base point, R^{m+1}
  Mat frame;       // (m+1) x m orthonormal frame of T_x S^m
  Vec value;       // phi(x), R^{n+1}
  Mat dphi;        // (n+1) x m, column i = dphi(e_i)
  SecondForm second;  // (n+1) x (m*m), column i*m+j = (nabla dphi)(e_i, e_j); empty for 1-jets
  TargetGeometry target;

  int m() const { return static_cast<int>(frame.cols()); }
  int n() const { return static_cast<int>(value.size()) - 1; }
  bool has_second() const { return second.cols() > 0; }

  Vec hess(int i, int j) const { return second.col(i * m() + j); }
  /// dphi applied to an ambient tangent vector.
  Vec push(const Vec& X) const { return dphi * (frame.transpose() * X); }
  Vec second_form(const Vec& X, const Vec& Y) const;
  Vec tension() const;
  /// (n+1) x (m+1) matrix of dphi acting on ambient vectors.
  Mat ambient_differential() const { return dphi * frame.transpose(); }
};

MapJet eval_jet(const MapSpec& map, const SpherePoint& x, int order = 2);
/// Chart finite-difference jet (always available, independent of mode()).
MapJet eval_jet_fd(const MapSpec& map, const SpherePoint& x, const FdSteps& steps = {});
/// Re-expresses a jet in the frame `frame * rotation`.
MapJet reframe(const MapJet& jet, const Mat& rotation);

/// Pointwise pullback data in an orthonormal frame of T_x S^m.
struct PullbackPointData {
  Mat metric;        // phi*h, m x m
  Vec eigenvalues;   // lambda_i^2, ascending
  Mat eigenvectors;  // columns, in the jet frame
  double energy_density = 0.0;  // |dphi|^2
  double sigma2 = 0.0;
  double metric_norm2 = 0.0;    // |phi*h|^2
  bool has_omega = false;
  Mat omega;                    // phi*Omega, antisymmetric m x m
  double omega_norm2 = 0.0;     // sum_{i<j} omega_ij^2
  int rank = 0;
};

PullbackPointData pullback_data(const Mat& dphi, const Vec& value, const TargetGeometry& target);
PullbackPointData pullback_data(const MapJet& jet);
PullbackPointData pullback_data(const MapJet& jet, const TargetGeometry& target);

Vec tension_field(const MapSpec& map, const SpherePoint& x);

struct DegreeResult {
  long degree = 0;
  double raw = 0.0;
};
DegreeResult topological_degree(const MapSpec& map, const QuadratureGrid& grid);

struct IsotropyResult {
  bool isotropic = false;
  double max_norm = 0.0;
};
IsotropyResult isotropy_check(const MapSpec& map, const QuadratureGrid& grid);

/// Closed-form linear stretch of the suspension map at polar angle s:
/// c (1 + tan^2(s/2)) / (1 + c^2 tan^2(s/2)); phi*h = stretch^2 g.
double suspension_stretch(double c, double s);

}  // namespace sphvar
