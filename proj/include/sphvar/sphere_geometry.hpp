#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "sphvar/linalg.hpp"

namespace sphvar {

/// Point of the unit sphere S^m in R^{m+1}.
class SpherePoint {
 public:
  /// Throws InvalidArgument unless |coords| = 1 within 1e-12 and m >= 2.
  explicit SpherePoint(Vec coords);
  /// Normalizes first; throws for the zero vector.
  static SpherePoint normalized(const Vec& v);

  const Vec& coords() const { return coords_; }
  int dim() const { return static_cast<int>(coords_.size()) - 1; }

 private:
  struct Trusted {};
  SpherePoint(Vec coords, Trusted) : coords_(std::move(coords)) {}
  Vec coords_;
};

/// Ambient vector tangent to the sphere at `base`.
struct TangentVector {
  TangentVector(SpherePoint b, Vec v);
  /// Projects v onto T_bS^m.
  static TangentVector project(const SpherePoint& b, const Vec& v);

  SpherePoint base;
  Vec vec;
};

double sphere_volume(int m);

/// Deterministic orthonormal basis of x^perp, as columns of an (m+1) x m matrix.
Mat tangent_frame(const Vec& x);

enum class Pole { North, South };

/// Stereographic chart. The north chart projects from the south pole (x0 = -1)
/// and covers the north hemisphere with |u| <= 1; the south chart mirrors it.
/// Metric g_ab = 4 delta_ab / (1 + |u|^2)^2.
class Chart {
 public:
  Chart(Pole pole, int m) : pole_(pole), dim_(m) {}

  Pole pole() const { return pole_; }
  int dim() const { return dim_; }

  Vec to_chart(const Vec& x) const;
  Vec to_sphere(const Vec& u) const;
  /// Columns are the coordinate vectors d x / d u_a in R^{m+1}.
  Mat basis(const Vec& u) const;
  Mat metric(const Vec& u) const;

  /// Conformal factor e^w with g = e^{2w} delta.
  static double scale(const Vec& u) { return 2.0 / (1.0 + u.squaredNorm()); }
  /// Gradient of w = log scale.
  static Vec dlog_scale(const Vec& u) { return -2.0 * u / (1.0 + u.squaredNorm()); }
  /// Gamma^k_ij of the chart metric.
  static double christoffel(int k, int i, int j, const Vec& u);

 private:
  Pole pole_;
  int dim_;
};

/// Chart used for a point: the one in which its coordinate norm is <= 1 (north on ties).
Chart chart_for(const Vec& x);

/// Finite-difference steps: first derivatives and second derivatives, each
/// refined by one Richardson level (h, h/2).
struct FdSteps {
  double first = 1e-4;
  double second = 1e-3;
};

/// Richardson-extrapolated central differences of a vector-valued chart
/// function; entry a holds d f / d u_a at u0.
std::vector<Eigen::VectorXd> chart_partials(const std::function<Eigen::VectorXd(const Vec&)>& f,
                                            const Vec& u0, double h);

/// Richardson-extrapolated second partials d^2 f / du_a du_b (row-major a*m+b).
std::vector<Eigen::VectorXd> chart_second_partials(
    const std::function<Eigen::VectorXd(const Vec&)>& f, const Vec& u0, double h);

/// Tensor-product rule on S^m: Gauss-Legendre in the m-1 polar angles (with
/// the sin^{m-k} volume weight folded in), uniform periodic rule in the azimuth.
/// Nodes are generated on demand in a fixed lexicographic order (first polar
/// angle slowest), with x_0 = cos(theta_1).
class QuadratureGrid {
 public:
  QuadratureGrid(int m, std::vector<int> resolution);

  int dim() const { return dim_; }
  const std::vector<int>& resolution() const { return resolution_; }
  std::size_t size() const { return size_; }

  Vec node(std::size_t i) const;
  double weight(std::size_t i) const;
  SpherePoint point(std::size_t i) const { return SpherePoint::normalized(node(i)); }

  double total_weight() const;
  std::string id() const;

 private:
  struct AngleRule {
    std::vector<double> cos_t, sin_t, weight;
  };
  int dim_;
  std::vector<int> resolution_;
  std::vector<AngleRule> rules_;
  std::size_t size_ = 1;
};

/// Builds the grid with the same count in every angle.
QuadratureGrid build_grid(int m, int resolution);
/// Builds the grid from explicit per-angle counts (m-1 polar, then azimuth).
QuadratureGrid build_grid(int m, std::vector<int> resolution);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Weighted sum in node order with compensated summation. Throws
/// NumericalError naming the first non-finite node.
double integrate(const QuadratureGrid& grid, std::span<const double> density);
double integrate(const QuadratureGrid& grid, const std::function<double(const Vec&)>& density);

/// Evaluates density at every node (in parallel, deterministic).
std::vector<double> sample_density(const QuadratureGrid& grid,
                                   const std::function<double(std::size_t, const Vec&)>& density);

struct ConformalSample {
  double f;
  TangentVector grad;
};

/// f_alpha(x) = <a_alpha, x> and its gradient a_alpha - f_alpha x; alpha is 1-based.
ConformalSample conformal_field(int alpha, const SpherePoint& x);

using TangentField = std::function<Vec(const Vec& x)>;

/// Levi-Civita derivative of a tangent field along X, by chart finite
/// differences and the stereographic Christoffel symbols. Uses chart_for()
/// unless a chart is given.
TangentVector covariant_derivative(const TangentField& field, const TangentVector& X,
                                   const FdSteps& steps = {});
TangentVector covariant_derivative(const TangentField& field, const TangentVector& X,
                                   const Chart& chart, const FdSteps& steps = {});

/// Laplace-Beltrami operator g^{ij}(d_ij f - Gamma^k_ij d_k f) by chart finite differences.
double laplacian_fd(const std::function<double(const Vec&)>& f, const SpherePoint& x,
                    const FdSteps& steps = {});

/// Gradient of a scalar function by chart finite differences (ambient tangent vector).
Vec gradient_fd(const std::function<double(const Vec&)>& f, const SpherePoint& x,
                const FdSteps& steps = {});

/// Great-circle exponential cos(t|v|) x + sin(t|v|) v/|v|, renormalized.
SpherePoint sphere_exp(const SpherePoint& x, const Vec& v, double t);

/// CSV with header x_0..x_m,weight.
void write_grid_csv(const QuadratureGrid& grid, std::ostream& out);

}  // namespace sphvar
