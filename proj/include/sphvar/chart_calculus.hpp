#pragma once

#include <functional>
#include <vector>

#include "sphvar/maps.hpp"

namespace sphvar {

/// Stereographic chart data at a point. Tensor components below are taken in
/// the orthonormal frame e_a = d_a / e^w, whose ambient vectors are `frame`.
struct ChartFrame {
  Chart chart{Pole::North, 2};
  Vec u;
  double scale = 1.0;  // e^w
  Mat frame;           // (m+1) x m
};

ChartFrame chart_frame(const SpherePoint& x);

/// Covariant derivative of a 2-tensor, stored as (c, a, b) -> (nabla_c T)_ab.
struct Tensor3 {
  int m = 0;
  std::vector<double> data;

  explicit Tensor3(int dim = 0) : m(dim), data(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}
  double& operator()(int c, int a, int b) { return data[(c * m + a) * m + b]; }
  double operator()(int c, int a, int b) const { return data[(c * m + a) * m + b]; }
};

/// phi*Omega with its first derivatives.
struct TwoFormJet {
  ChartFrame frame;
  Mat sigma;
  Tensor3 nabla;
  double nabla_norm2 = 0.0;  // sum_c sum_{a<b} (nabla_c sigma)_ab^2
  double d_norm2 = 0.0;      // sum_{a<b<c} (d sigma)_abc^2
  Vec delta;                 // codifferential, delta sigma_b = -sum_a (nabla_a sigma)_ab
  double delta_norm2 = 0.0;
  Vec delta_sharp;           // (delta sigma)^sharp as an ambient vector
};

TwoFormJet pullback_two_form(const MapSpec& map, const SpherePoint& x, const FdSteps& steps = {});

/// phi*h with its covariant derivative.
struct SymmetricJet {
  ChartFrame frame;
  Mat value;
  Tensor3 nabla;
  double nabla_norm2 = 0.0;  // full sum over (c, a, b)
};

SymmetricJet pullback_metric_jet(const MapSpec& map, const SpherePoint& x, const FdSteps& steps = {});

/// Section of T*M (x) phi^{-1}TN given by an ambient matrix W(x): omega(X) = W X.
using VectorFormSampler = std::function<Mat(const MapJet& jet)>;

/// tr nabla omega, by chart differences of omega(d_a) with the pullback connection.
Vec vector_form_trace(const MapSpec& map, const SpherePoint& x, const VectorFormSampler& form,
                      int jet_order = 1, const FdSteps& steps = {});

/// tr nabla (dphi o C_phi).
Vec cauchy_green_divergence(const MapSpec& map, const SpherePoint& x, const FdSteps& steps = {});
/// tr nabla (|dphi|^2 dphi - dphi o C_phi); the sigma_2 Euler-Lagrange operator.
Vec sigma2_tension(const MapSpec& map, const SpherePoint& x, const FdSteps& steps = {});

/// Real 1-form beta(X) = <b(x), X> with b an ambient covector.
using CovectorSampler = std::function<Vec(const MapJet& jet)>;

/// |d beta|^2 = sum_{a<b} (d beta)_ab^2.
double one_form_d_norm2(const MapSpec& map, const SpherePoint& x, const CovectorSampler& beta,
                        int jet_order = 1, const FdSteps& steps = {});

}  // namespace sphvar
